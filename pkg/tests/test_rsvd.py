import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrqmm import oracles
from lrqmm.errors import ParameterError, ShapeError
from lrqmm.matrix import generate, parse_distribution
from lrqmm.quantize import Rounding, quantize, residual
from lrqmm.rsvd import (
    SMALL_SVD_MAX,
    LowRankFactors,
    RsvdConfig,
    range_finder,
    reconstruct,
    rsvd,
    small_svd,
)


def _check_factors(a, f: LowRankFactors, tol=1e-11):
    k = f.rank
    np.testing.assert_allclose(f.U.T @ f.U, np.eye(k), atol=tol)
    np.testing.assert_allclose(f.Vt @ f.Vt.T, np.eye(k), atol=tol)
    assert np.all(np.diff(f.sigma) <= 0)
    assert np.all(f.sigma >= 0)


@pytest.mark.parametrize("shape", [(8, 5), (5, 8), (12, 12), (1, 6), (6, 1)])
def test_small_svd_against_gram_oracle(shape):
    b = np.random.default_rng(sum(shape)).standard_normal(shape)
    f = small_svd(b)
    _check_factors(b, f)
    ref = oracles.singular_values_via_gram(b)
    np.testing.assert_allclose(f.sigma[: len(ref)], ref, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(reconstruct(f), b, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.integers(1, 25), st.integers(0, 2**32))
def test_small_svd_reconstructs(m, n, seed):
    b = np.random.default_rng(seed).standard_normal((m, n))
    f = small_svd(b)
    _check_factors(b, f)
    np.testing.assert_allclose(reconstruct(f), b, atol=1e-11 * max(1.0, np.abs(b).max()))
    np.testing.assert_allclose(f.sigma, np.linalg.svd(b, compute_uv=False), rtol=1e-10, atol=1e-12)


def test_small_svd_rank_deficient():
    rng = np.random.default_rng(0)
    b = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 15))
    f = small_svd(b)
    _check_factors(b, f)
    assert np.count_nonzero(f.sigma) == 3
    np.testing.assert_allclose(reconstruct(f), b, atol=1e-12)


def test_small_svd_zero_matrix():
    f = small_svd(np.zeros((4, 3)))
    assert not f.sigma.any()
    _check_factors(None, f)


def test_small_svd_size_limit():
    with pytest.raises(ShapeError):
        small_svd(np.ones((SMALL_SVD_MAX + 1, SMALL_SVD_MAX + 1)))


def test_config_validation():
    with pytest.raises(ParameterError):
        RsvdConfig(0)
    with pytest.raises(ParameterError):
        RsvdConfig(5, oversampling=-1)
    with pytest.raises(ParameterError):
        rsvd(np.ones((10, 10)), RsvdConfig(8, oversampling=5))


def test_exact_low_rank_input_recovered():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((120, 5)) @ rng.standard_normal((5, 90))
    f = rsvd(a, RsvdConfig(5, seed=3))
    assert f.rank == 5
    np.testing.assert_allclose(reconstruct(f), a, atol=1e-10 * np.abs(a).max())


def test_range_finder_orthonormal():
    a = np.random.default_rng(2).standard_normal((60, 40))
    q = range_finder(a, RsvdConfig(10, seed=1))
    assert q.shape == (60, 15)
    np.testing.assert_allclose(q.T @ q, np.eye(15), atol=1e-12)


def test_rsvd_seed_determinism():
    a = np.random.default_rng(3).standard_normal((80, 70))
    f1, f2 = rsvd(a, RsvdConfig(6, seed=9)), rsvd(a, RsvdConfig(6, seed=9))
    np.testing.assert_array_equal(reconstruct(f1), reconstruct(f2))


def test_leading_singular_values_close_to_lapack():
    spec = parse_distribution("Uniform(0,1)", seed=11)
    a = generate(spec, 200, 200)
    r = residual(a, quantize(a, 4, Rounding.FLOOR))
    f = rsvd(r, RsvdConfig(10, seed=1))
    ref = np.linalg.svd(r, compute_uv=False)
    # the mean direction dominates and is captured almost exactly
    assert f.sigma[0] == pytest.approx(ref[0], rel=1e-6)
    assert np.all(f.sigma <= ref[:10] * (1 + 1e-10))


def test_floor_residual_tail_near_optimal():
    # sketch error vs. the optimal rank-10 tail computed by LAPACK
    spec = parse_distribution("Uniform(0,1)", seed=5)
    a = generate(spec, 500, 500)
    r = residual(a, quantize(a, 4, Rounding.FLOOR))
    f = rsvd(r, RsvdConfig(10, seed=2))
    sv = np.linalg.svd(r, compute_uv=False)
    optimal = np.sqrt(np.sum(sv[10:] ** 2))
    err = np.linalg.norm(r - reconstruct(f))
    assert err <= 1.05 * optimal
    # the residual is mean-dominated yet still noisy: roughly half its energy remains
    assert 0.4 < err / np.linalg.norm(r) < 0.6


@settings(max_examples=25, deadline=None)
@given(st.integers(10, 60), st.integers(10, 60), st.integers(1, 5), st.integers(0, 2**32))
def test_rsvd_error_never_below_optimal(m, n, r, seed):
    a = np.random.default_rng(seed).standard_normal((m, n))
    f = rsvd(a, RsvdConfig(r, oversampling=3, seed=seed))
    sv = np.linalg.svd(a, compute_uv=False)
    err = np.linalg.norm(a - reconstruct(f), 2)
    assert err >= sv[r] * (1 - 1e-10)
    _check_factors(a, f)
