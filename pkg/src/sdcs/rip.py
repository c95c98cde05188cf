"""Restricted isometry constant estimation and projection diagnostics.

The order-s constant of a matrix A is the smallest delta with
(1 - delta) <= ||A_T x||^2 / ||x||^2 <= (1 + delta) over all supports T of
size s, i.e. the worst extreme-eigenvalue deviation of the support Gram
matrices from 1.  Exact computation enumerates supports (exponential in
s, capped); the Monte Carlo variant maximizes over sampled supports and
therefore never exceeds the exact value.

Normalization is always the caller's job: nothing here rescales inputs,
except for projected_matrix whose 1/sqrt(ell) factor is part of its
definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from .difference import projected_basis
from .linalg import as_matrix
from .measurement import Ensemble, sample_matrix
from .rng import RngStream

ENUMERATION_CAP = 10**6
_BLOCK = 16_384


@dataclass(frozen=True)
class RipEstimate:
    s: int
    value: float
    mode: str  # "exact" | "monte-carlo"
    supports_checked: int


def _max_deviation(gram: np.ndarray, supports: np.ndarray) -> float:
    """Worst eigenvalue deviation from 1 over the given support rows."""
    subs = gram[supports[:, :, None], supports[:, None, :]]
    w = np.linalg.eigvalsh(subs)
    return float(np.max(np.maximum(w[:, -1] - 1.0, 1.0 - w[:, 0])))


def ric_exact(a, s: int, enumeration_cap: int = ENUMERATION_CAP) -> RipEstimate:
    """Exact restricted isometry constant by support enumeration.

    Supports are visited in lexicographic order in blocks.  Raises when
    the support count exceeds the cap; use ric_monte_carlo instead for
    such instances.
    """
    a = as_matrix(a)
    n = a.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= {n}, got s={s}")
    total = math.comb(n, s)
    if total > enumeration_cap:
        raise ValueError(
            f"comb({n}, {s}) = {total} supports exceeds the enumeration cap "
            f"{enumeration_cap}; use ric_monte_carlo"
        )
    gram = a.T @ a
    it = combinations(range(n), s)
    worst = 0.0
    while True:
        block = list(islice(it, _BLOCK))
        if not block:
            break
        worst = max(worst, _max_deviation(gram, np.array(block, dtype=np.intp)))
    return RipEstimate(s=s, value=worst, mode="exact", supports_checked=total)


def ric_monte_carlo(a, s: int, trials: int, rng: RngStream) -> RipEstimate:
    """Lower bound on the constant from uniformly sampled supports."""
    a = as_matrix(a)
    n = a.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= {n}, got s={s}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gram = a.T @ a
    worst = 0.0
    done = 0
    while done < trials:
        count = min(_BLOCK, trials - done)
        block = np.stack([rng.choose_indices(n, s) for _ in range(count)])
        worst = max(worst, _max_deviation(gram, block))
        done += count
    return RipEstimate(s=s, value=worst, mode="monte-carlo", supports_checked=trials)


def projected_matrix(phi, r: int, ell: int) -> np.ndarray:
    """The ell x N matrix (1/sqrt(ell)) * (first ell projection rows) @ phi."""
    phi = as_matrix(phi, "phi")
    m = phi.shape[0]
    if not 1 <= ell <= m:
        raise ValueError(f"need 1 <= ell <= {m}, got ell={ell}")
    return (projected_basis(m, r, ell) @ phi) / math.sqrt(ell)


@dataclass(frozen=True)
class SmallBallSummary:
    """Empirical distribution of squared projected column norms."""

    ell: int
    trials: int
    mean: float
    quantile_levels: tuple[float, ...]
    quantiles: np.ndarray

    def as_pairs(self) -> list[tuple[float, float]]:
        return [(lv, float(qv)) for lv, qv in zip(self.quantile_levels, self.quantiles)]


_DEFAULT_LEVELS = (0.01, 0.05, 0.10, 0.25, 0.50)


def small_ball_probe(
    ensemble: Ensemble,
    m: int,
    r: int,
    ell: int,
    trials: int,
    rng: RngStream,
    quantile_levels: tuple[float, ...] = _DEFAULT_LEVELS,
) -> SmallBallSummary:
    """Sample ||projection @ column||^2 over independent ensemble columns.

    A healthy ensemble keeps the lower quantiles well away from zero;
    for entrywise-independent unit-variance ensembles the mean is ell.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if any(not 0.0 <= lv <= 1.0 for lv in quantile_levels):
        raise ValueError("quantile levels must lie in [0, 1]")
    if sorted(quantile_levels) != list(quantile_levels):
        raise ValueError("quantile levels must be non-decreasing")
    w = projected_basis(m, r, ell)
    cols = sample_matrix(ensemble, m, trials, rng)
    sq = np.sum((w @ cols) ** 2, axis=0)
    return SmallBallSummary(
        ell=ell,
        trials=trials,
        mean=float(np.mean(sq)),
        quantile_levels=tuple(quantile_levels),
        quantiles=np.quantile(sq, quantile_levels),
    )
