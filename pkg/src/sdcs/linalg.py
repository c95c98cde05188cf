"""Dense real linear algebra substrate.

All public operations accept array-likes, coerce to float64, and reject
non-finite entries up front.  Factorizations are LAPACK-backed; contracts
(ordering, orthonormality, reconstruction) are what the rest of the
package relies on, not any particular algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite float64 2-D array with positive dimensions."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a finite float64 1-D array."""
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={v.ndim}")
    if v.size < 1:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD a = u @ diag(s) @ v.T with s non-increasing.

    u and v have orthonormal columns; s is non-negative.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit dimension checking."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def svd(a) -> SvdFactors:
    """Thin singular value decomposition of a dense real matrix."""
    a = as_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SvdFactors(u=u, s=s, v=vh.T)


def sigma_j(a, j: int) -> float:
    """j-th largest singular value, 1-based (j=1 is the largest)."""
    a = as_matrix(a)
    k = min(a.shape)
    if not 1 <= j <= k:
        raise ValueError(f"index j={j} out of range 1..{k}")
    return float(np.linalg.svd(a, compute_uv=False)[j - 1])


def sigma_min(a) -> float:
    """Smallest singular value."""
    a = as_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def operator_norm(a) -> float:
    """Largest singular value (the l2 -> l2 operator norm)."""
    a = as_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def pseudoinverse(a, rel_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values at or below rel_tol * sigma_max are treated as zero.
    """
    a = as_matrix(a)
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    f = svd(a)
    cutoff = rel_tol * (f.s[0] if f.s.size else 0.0)
    inv_s = np.where(f.s > cutoff, 1.0 / np.where(f.s > cutoff, f.s, 1.0), 0.0)
    return (f.v * inv_s) @ f.u.T


def least_squares(a, b) -> np.ndarray:
    """Minimum-norm minimizer of ||a x - b||_2, i.e. pinv(a) @ b."""
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != b.size:
        raise ValueError(f"dimension mismatch: {a.shape} vs length {b.size}")
    return pseudoinverse(a) @ b


def read_matrix_text(text: str) -> np.ndarray:
    """Parse the matrix fixture format: 'rows cols' then one line per row."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix fixture")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("fixture header must be 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if rows < 1 or cols < 1:
        raise ValueError("fixture dimensions must be positive")
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} data lines, got {len(lines) - 1}")
    out = np.empty((rows, cols), dtype=np.float64)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != cols:
            raise ValueError(f"row {i}: expected {cols} entries, got {len(parts)}")
        out[i] = [float(p) for p in parts]
    return as_matrix(out, "fixture")


def write_matrix_text(a) -> str:
    """Render a matrix in the fixture format with round-trip-exact floats."""
    a = as_matrix(a)
    rows = [f"{a.shape[0]} {a.shape[1]}"]
    for i in range(a.shape[0]):
        rows.append(" ".join(repr(float(x)) for x in a[i]))
    return "\n".join(rows) + "\n"
