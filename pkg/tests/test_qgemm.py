import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.lib.stride_tricks import as_strided

from lrqmm import oracles
from lrqmm.errors import OverflowPreconditionError, ParameterError, ShapeError
from lrqmm.matrix import generate, matmul_exact, parse_distribution, relative_error
from lrqmm.qgemm import (
    FLOAT_EXACT_LIMIT,
    GemmScheme,
    SchemeKind,
    accumulation_bound,
    direct_quant_gemm,
    int_gemm,
    lrqmm_full_rank_check,
    lrqmm_gemm,
    qt_gemm,
    qt_terms,
    run_scheme,
)
from lrqmm.quantize import QuantizedMatrix, Rounding, qmax, quantize


def _codes(shape, bits, seed):
    top = qmax(bits)
    vals = np.random.default_rng(seed).integers(-top, top + 1, size=shape)
    return QuantizedMatrix(vals.astype(np.int64), bits, 1.0, Rounding.NEAREST)


def _operands(dist, m, k, n, seed=1):
    spec = parse_distribution(dist)
    return generate(spec.with_seed(seed), m, k), generate(spec.with_seed(seed + 1000), k, n)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 12), st.sampled_from([2, 4, 8, 16]), st.integers(0, 2**32))
def test_int_gemm_matches_scalar_loop(m, k, n, bits, seed):
    aq, bq = _codes((m, k), bits, seed), _codes((k, n), bits, seed + 1)
    ref = np.array(oracles.scalar_matmul(aq.values, bq.values), dtype=np.int64)
    for kernel in ("float", "int64", "auto"):
        got = int_gemm(aq, bq, kernel)
        np.testing.assert_array_equal(np.asarray(got, dtype=np.int64), ref)


def test_int_gemm_shape_and_kernel_errors():
    with pytest.raises(ShapeError):
        int_gemm(_codes((2, 3), 4, 0), _codes((2, 3), 4, 1))
    with pytest.raises(ParameterError):
        int_gemm(_codes((2, 3), 4, 0), _codes((3, 2), 4, 1), kernel="gpu")


def _broadcast_codes(shape, value, bits):
    vals = as_strided(np.full(1, value, dtype=np.int64), shape=shape, strides=(0, 0))
    return QuantizedMatrix(vals, bits, 1.0, Rounding.NEAREST)


def test_overflow_precondition_raises_before_compute():
    k = 1 << 34
    aq, bq = _broadcast_codes((1, k), 1, 16), _broadcast_codes((k, 1), 1, 16)
    assert accumulation_bound(aq, bq) >= 1 << 63
    with pytest.raises(OverflowPreconditionError):
        int_gemm(aq, bq)


def test_wide_accumulation_uses_int64_route():
    k = 1 << 24
    top = qmax(16)
    aq, bq = _broadcast_codes((1, k), top, 16), _broadcast_codes((k, 1), top, 16)
    assert accumulation_bound(aq, bq) >= FLOAT_EXACT_LIMIT
    with pytest.raises(OverflowPreconditionError):
        int_gemm(aq, bq, "float")
    out = int_gemm(aq, bq, "auto")
    assert out.dtype == np.int64
    assert int(out[0, 0]) == k * top * top


def test_direct_quant_example():
    a = np.array([[1.0, 0.5], [0.25, -1.0]])
    b = np.eye(2)
    res = direct_quant_gemm(a, b, 4)
    # scale 7: codes trunc(7a) = [[7, 3], [1, -7]]
    np.testing.assert_allclose(res.D, np.array([[7, 3], [1, -7]]) / 7.0)
    assert set(res.timings) == {"quantize", "int_gemm", "package"}


def test_qt_terms_sum_is_qt4():
    a, b = _operands("Normal(0,1)", 15, 12, 9)
    terms = qt_terms(a, b, 4)
    np.testing.assert_allclose(sum(terms), qt_gemm(a, b, 4).D, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(sum(terms[:3]), qt_gemm(a, b, 4, terms=3).D, rtol=1e-13, atol=1e-13)
    with pytest.raises(ParameterError):
        qt_gemm(a, b, 4, terms=2)


@pytest.mark.parametrize("dist", ["Normal(0,1)", "Uniform(0,1)", "Poisson(10)"])
@pytest.mark.parametrize("bits", [4, 8])
def test_qt4_matches_literal_assembly(dist, bits):
    a, b = _operands(dist, 20, 20, 20, seed=3)
    ref = np.array(oracles.literal_compensated_product(a, b, bits))
    assert relative_error(ref, qt_gemm(a, b, bits).D) <= 1e-12


def test_compensation_improves_on_direct():
    a, b = _operands("Uniform(0,1)", 100, 100, 100)
    c = matmul_exact(a, b)
    dq = relative_error(c, direct_quant_gemm(a, b, 4).D)
    qt3 = relative_error(c, qt_gemm(a, b, 4, terms=3).D)
    qt4 = relative_error(c, qt_gemm(a, b, 4).D)
    lr = relative_error(c, lrqmm_gemm(a, b, scheme=GemmScheme.lrqmm(4, 10)).D)
    assert qt4 < qt3 < dq
    assert lr < dq / 10


@pytest.mark.parametrize("bits", [4, 8])
@pytest.mark.parametrize("dist", ["Uniform(0,1)", "Normal(0,1)", "Exponential(4)"])
def test_full_rank_identity(dist, bits):
    a, b = _operands(dist, 30, 25, 20)
    assert lrqmm_full_rank_check(a, b, bits) <= 1e-9


def test_alpha_beta_contract():
    a, b = _operands("Uniform(0,1)", 40, 30, 20)
    d = np.random.default_rng(0).standard_normal((40, 20))
    scheme = GemmScheme.lrqmm(8, 5, seed=4)
    base = lrqmm_gemm(a, b, scheme=scheme).D
    out = lrqmm_gemm(a, b, d, alpha=2.0, beta=-0.5, scheme=scheme).D
    np.testing.assert_allclose(out, 2.0 * base - 0.5 * d, rtol=1e-13, atol=1e-13)
    with pytest.raises(ParameterError):
        lrqmm_gemm(a, b, beta=1.0, scheme=scheme)
    with pytest.raises(ShapeError):
        lrqmm_gemm(a, b, np.ones((3, 3)), beta=1.0, scheme=scheme)


def test_lrqmm_phases_recorded():
    a, b = _operands("Uniform(0,1)", 40, 30, 20)
    res = lrqmm_gemm(a, b, scheme=GemmScheme.lrqmm(4, 5))
    assert set(res.timings) == {"quantize", "int_gemm", "package", "rsvd", "residual_terms"}
    assert all(v >= 0 for v in res.timings.values())


def test_lrqmm_rank_too_large():
    a, b = _operands("Uniform(0,1)", 20, 20, 20)
    with pytest.raises(ParameterError):
        lrqmm_gemm(a, b, scheme=GemmScheme.lrqmm(4, 21))
    with pytest.raises(ParameterError):
        lrqmm_gemm(a, b, scheme=GemmScheme(SchemeKind.DIRECT, 4))


def test_scheme_validation():
    with pytest.raises(ParameterError):
        GemmScheme(SchemeKind.LRQMM, 4)
    with pytest.raises(ValueError):
        GemmScheme("bogus", 4)
    s = GemmScheme("lrqmm", 4, rank=7)
    assert s.rsvd.rank == 7


def test_run_scheme_dispatch():
    a, b = _operands("Normal(0,1)", 20, 20, 20)
    c = matmul_exact(a, b)
    np.testing.assert_array_equal(run_scheme(a, b, GemmScheme(SchemeKind.EXACT)).D, c)
    for kind in ("direct", "qt3", "qt4"):
        res = run_scheme(a, b, GemmScheme(kind, 8))
        assert res.scheme.kind.value == kind
        assert relative_error(c, res.D) < 0.05


def test_lrqmm_deterministic():
    a, b = _operands("Exponential(4)", 60, 50, 40)
    s = GemmScheme.lrqmm(4, 6, seed=12)
    np.testing.assert_array_equal(lrqmm_gemm(a, b, scheme=s).D, lrqmm_gemm(a, b, scheme=s).D)


def test_error_nonincreasing_in_rank_with_exact_factors():
    # with deterministic truncations of the same SVD, more rank never hurts much
    a, b = _operands("Uniform(0,1)", 60, 60, 60)
    c = matmul_exact(a, b)
    errs = [relative_error(c, lrqmm_gemm(a, b, scheme=GemmScheme.lrqmm(4, r, oversampling=60 - r, power_iters=0)).D)
            for r in (1, 10, 30, 55)]
    assert all(y <= x * 1.05 for x, y in zip(errs, errs[1:]))
