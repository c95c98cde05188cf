import math

import numpy as np
import pytest

from sdcs.difference import (
    difference_matrix,
    difference_power,
    inverse_difference_power,
    projected_basis,
    singular_profile,
)
from sdcs.rng import RngStream

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def test_difference_matrix_small():
    assert np.array_equal(difference_matrix(1), [[1.0]])
    want = [[1.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]]
    assert np.array_equal(difference_matrix(3), want)
    with pytest.raises(ValueError):
        difference_matrix(0)


def test_inverse_power_closed_form_small():
    assert np.array_equal(inverse_difference_power(3, 1), np.tril(np.ones((3, 3))))
    want = [[1.0, 0.0, 0.0], [2.0, 1.0, 0.0], [3.0, 2.0, 1.0]]
    assert np.array_equal(inverse_difference_power(3, 2), want)


def test_inverse_power_binomial_entries():
    m, r = 10, 3
    inv = inverse_difference_power(m, r)
    for i in range(m):
        for j in range(m):
            want = math.comb(i - j + r - 1, r - 1) if i >= j else 0
            assert inv[i, j] == want


@pytest.mark.parametrize("m", [1, 8, 33, 128])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_defining_identity(m, r):
    d_pow = np.linalg.matrix_power(difference_matrix(m), r)
    prod = d_pow @ inverse_difference_power(m, r)
    assert np.max(np.abs(prod - np.eye(m))) <= 1e-9


@pytest.mark.parametrize("m", [8, 32, 128])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_closed_form_matches_numeric_inverse(m, r):
    d_pow = np.linalg.matrix_power(difference_matrix(m), r)
    numeric = np.linalg.inv(d_pow)
    closed = inverse_difference_power(m, r)
    assert np.max(np.abs(closed - numeric)) <= 1e-8 * np.max(np.abs(closed))


def test_difference_power_caching_and_invariants():
    dp1 = difference_power(12, 2)
    dp2 = difference_power(12, 2)
    assert dp1 is dp2
    assert not dp1.inv_power.flags.writeable
    assert np.array_equal(np.triu(dp1.inv_power, k=1), np.zeros((12, 12)))
    assert np.all(dp1.factors.s > 0)
    recon = dp1.factors.u @ np.diag(dp1.factors.s) @ dp1.factors.v.T
    assert np.max(np.abs(recon - dp1.inv_power)) <= 1e-9 * (1 + np.max(dp1.inv_power))


def test_singular_profile_small_exact():
    assert np.allclose(singular_profile(1, 1), [1.0])
    # 2x2 case reduces to the lower-triangular all-ones Gram eigenproblem
    assert np.allclose(singular_profile(2, 1), [GOLDEN, GOLDEN - 1.0], atol=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_singular_profile_power_law_envelope(r):
    # scaled profile sigma_j * (j/m)^r stays in a stable band as m grows
    ratios = {}
    for m in (64, 128):
        s = singular_profile(m, r)
        j = np.arange(1, m + 1)
        scaled = s * (j / m) ** r
        ratios[m] = scaled.max() / scaled.min()
    assert abs(ratios[128] / ratios[64] - 1.0) < 0.1


def test_profile_non_increasing():
    s = singular_profile(50, 2)
    assert np.all(np.diff(s) <= 0)


def test_projected_basis_orthonormal_rows():
    m, r = 20, 2
    full = projected_basis(m, r, m)
    assert np.max(np.abs(full @ full.T - np.eye(m))) <= 1e-10
    assert np.max(np.abs(full.T @ full - np.eye(m))) <= 1e-10
    part = projected_basis(m, r, 7)
    assert part.shape == (7, m)
    assert np.max(np.abs(part @ part.T - np.eye(7))) <= 1e-10
    single = projected_basis(m, r, 1)
    assert np.linalg.norm(single[0]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        projected_basis(m, r, 0)
    with pytest.raises(ValueError):
        projected_basis(m, r, m + 1)


@pytest.mark.parametrize("r", [1, 2])
def test_projection_inequality_chain(r):
    # sigma_min(Dinv^r @ Phi_T) >= sigma_ell(Dinv^r) * sigma_min(P_ell V^T Phi_T)
    m, s = 24, 3
    rng = RngStream(100 + r)
    phi_t = rng.normals(m * s).reshape(m, s)
    dp = difference_power(m, r)
    lhs = np.linalg.svd(dp.inv_power @ phi_t, compute_uv=False)[-1]
    vt = dp.factors.v.T
    for ell in range(s, m + 1):
        proj = vt[:ell] @ phi_t
        smin_proj = np.linalg.svd(proj, compute_uv=False)[-1]
        rhs = dp.factors.s[ell - 1] * smin_proj
        assert lhs >= rhs - 1e-10 * max(1.0, lhs)
