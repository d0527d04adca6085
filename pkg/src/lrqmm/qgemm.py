"""Quantized GEMM pipelines: direct, full residual compensation, and LRQMM.

Every pipeline returns a :class:`GemmResult` carrying the output matrix and
per-phase timings. Direct and full-compensation schemes default to truncation
toward zero (an integer cast); LRQMM always quantizes with floor so that its
residuals are nonnegative and dominated by their mean.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .errors import OverflowPreconditionError, ParameterError, ShapeError
from .matrix import as_matrix, derive_seed, matmul_exact, relative_error
from .quantize import (
    QuantizedMatrix,
    Rounding,
    dequant_result,
    dequantize,
    quantize,
)
from .rsvd import SMALL_SVD_MAX, LowRankFactors, RsvdConfig, full_svd, rsvd
from .timing import PhaseTimer

FLOAT_EXACT_LIMIT = 1 << 53
INT64_LIMIT = 1 << 63

KERNELS = ("auto", "float", "int64")


@numba.njit(cache=True)
def _igemm_i64(a, b, out):
    # i-p-j order: unit stride over B rows and the output row.
    m, k = a.shape
    n = b.shape[1]
    for i in range(m):
        row = out[i]
        for p in range(k):
            aip = a[i, p]
            if aip != 0:
                brow = b[p]
                for j in range(n):
                    row[j] += aip * brow[j]


def accumulation_bound(aq: QuantizedMatrix, bq: QuantizedMatrix) -> int:
    """Worst-case magnitude of any partial sum of the integer product."""
    return aq.cols * aq.qmax * bq.qmax


def int_gemm(aq: QuantizedMatrix, bq: QuantizedMatrix, kernel: str = "auto") -> np.ndarray:
    """Exact integer product of two code matrices.

    ``kernel="int64"`` runs a compiled loop with a 64-bit accumulator.
    ``kernel="float"`` uses float64 BLAS, which is exact whenever every partial
    sum stays below 2**53. ``"auto"`` picks the float route when it is exact.
    The result is float64 when it is exactly representable, int64 otherwise.
    """
    if aq.cols != bq.rows:
        raise ShapeError(f"cannot multiply {aq.shape} by {bq.shape}")
    if kernel not in KERNELS:
        raise ParameterError(f"unknown kernel {kernel!r}")
    bound = accumulation_bound(aq, bq)
    if bound >= INT64_LIMIT:
        raise OverflowPreconditionError(
            f"k*qmax_a*qmax_b = {bound} does not fit a signed 64-bit accumulator"
        )
    exact_in_float = bound < FLOAT_EXACT_LIMIT
    if kernel == "auto":
        kernel = "float" if exact_in_float else "int64"
    if kernel == "float":
        if not exact_in_float:
            raise OverflowPreconditionError(f"k*qmax_a*qmax_b = {bound} exceeds 2**53")
        return aq.values.astype(np.float64) @ bq.values.astype(np.float64)
    out = np.zeros((aq.rows, bq.cols), dtype=np.int64)
    _igemm_i64(np.ascontiguousarray(aq.values), np.ascontiguousarray(bq.values), out)
    return out.astype(np.float64) if exact_in_float else out


class SchemeKind(str, enum.Enum):
    EXACT = "exact"
    DIRECT = "direct"
    QT_PARTIAL = "qt3"
    QT_FULL = "qt4"
    LRQMM = "lrqmm"


@dataclass(frozen=True)
class GemmScheme:
    kind: SchemeKind
    bits: int = 4
    rank: int | None = None
    rsvd: RsvdConfig | None = None
    rounding: Rounding = Rounding.TRUNCATE
    kernel: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        if self.kind is SchemeKind.LRQMM:
            if self.rank is None and self.rsvd is None:
                raise ParameterError("lrqmm scheme needs a rank")
            if self.rsvd is None:
                object.__setattr__(self, "rsvd", RsvdConfig(self.rank))
            elif self.rank is None:
                object.__setattr__(self, "rank", self.rsvd.rank)
            elif self.rank != self.rsvd.rank:
                raise ParameterError("rank and rsvd.rank disagree")

    @classmethod
    def lrqmm(cls, bits: int, rank: int, **rsvd_kw) -> "GemmScheme":
        return cls(SchemeKind.LRQMM, bits, rank, RsvdConfig(rank, **rsvd_kw))


@dataclass(eq=False)
class GemmResult:
    D: np.ndarray
    scheme: GemmScheme
    timings: dict[str, int] = field(default_factory=dict)


def _check_conformable(a, b):
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")


def direct_quant_gemm(a, b, bits: int, rounding=Rounding.TRUNCATE, kernel: str = "auto") -> GemmResult:
    """Quantize both operands, multiply codes, rescale."""
    a, b = as_matrix(a, "A"), as_matrix(b, "B")
    _check_conformable(a, b)
    timer = PhaseTimer()
    with timer.phase("quantize"):
        aq = quantize(a, bits, rounding)
        bq = quantize(b, bits, rounding)
    with timer.phase("int_gemm"):
        c_int = int_gemm(aq, bq, kernel)
    with timer.phase("package"):
        c = dequant_result(c_int, aq.scale, bq.scale)
    scheme = GemmScheme(SchemeKind.DIRECT, bits, rounding=rounding, kernel=kernel)
    return GemmResult(c, scheme, timer.ns)


def qt_terms(a, b, bits: int, rounding=Rounding.TRUNCATE, kernel: str = "auto") -> list[np.ndarray]:
    """The four terms of the residual-compensated product, residuals re-quantized.

    Order: A*B, A*R_B, R_A*B, R_A*R_B (each already rescaled).
    """
    a, b = as_matrix(a, "A"), as_matrix(b, "B")
    _check_conformable(a, b)
    aq, bq = quantize(a, bits, rounding), quantize(b, bits, rounding)
    raq = quantize(a - dequantize(aq), bits, rounding)
    rbq = quantize(b - dequantize(bq), bits, rounding)
    pairs = ((aq, bq), (aq, rbq), (raq, bq), (raq, rbq))
    return [dequant_result(int_gemm(x, y, kernel), x.scale, y.scale) for x, y in pairs]


def qt_gemm(a, b, bits: int, terms: int = 4, rounding=Rounding.TRUNCATE, kernel: str = "auto") -> GemmResult:
    """Full residual compensation with the first three or all four terms."""
    if terms not in (3, 4):
        raise ParameterError("terms must be 3 or 4")
    a, b = as_matrix(a, "A"), as_matrix(b, "B")
    _check_conformable(a, b)
    timer = PhaseTimer()
    with timer.phase("quantize"):
        aq, bq = quantize(a, bits, rounding), quantize(b, bits, rounding)
        raq = quantize(a - dequantize(aq), bits, rounding)
        rbq = quantize(b - dequantize(bq), bits, rounding)
    pairs = [(aq, bq), (aq, rbq), (raq, bq), (raq, rbq)][:terms]
    with timer.phase("int_gemm"):
        products = [int_gemm(x, y, kernel) for x, y in pairs]
    with timer.phase("package"):
        c = dequant_result(products[0], aq.scale, bq.scale)
        for (x, y), p in zip(pairs[1:], products[1:]):
            c = c + dequant_result(p, x.scale, y.scale)
    kind = SchemeKind.QT_FULL if terms == 4 else SchemeKind.QT_PARTIAL
    return GemmResult(c, GemmScheme(kind, bits, rounding=rounding, kernel=kernel), timer.ns)


def _residual_terms(u_r: LowRankFactors, w_r: LowRankFactors, a_f, b_f):
    u_t = u_r.U * u_r.sigma  # U_r Sigma_r
    z_t = w_r.sigma[:, None] * w_r.Vt  # Gamma_r Z_r^T
    rc1 = u_t @ (u_r.Vt @ b_f)
    rc2 = (a_f @ w_r.U) @ z_t
    rc3 = (u_t @ (u_r.Vt @ w_r.U)) @ z_t
    return rc1, rc2, rc3


def lrqmm_gemm(
    a,
    b,
    d=None,
    alpha: float = 1.0,
    beta: float = 0.0,
    scheme: GemmScheme | None = None,
    *,
    exact_svd: bool = False,
) -> GemmResult:
    """``D = alpha * A B + beta * D`` with low-rank residual compensation.

    Residuals come from floor quantization and are approximated by rank-r
    randomized SVD factors; the three compensation terms are tall-skinny
    float64 products. ``exact_svd=True`` substitutes full deterministic SVDs
    of the residuals (every singular triple kept) for the randomized ones.
    """
    if scheme is None or scheme.kind is not SchemeKind.LRQMM:
        raise ParameterError("lrqmm_gemm needs an lrqmm scheme")
    a, b = as_matrix(a, "A"), as_matrix(b, "B")
    _check_conformable(a, b)
    m, k = a.shape
    n = b.shape[1]
    if beta != 0.0:
        if d is None:
            raise ParameterError("beta != 0 needs an input D")
        d = as_matrix(d, "D")
        if d.shape != (m, n):
            raise ShapeError(f"D has shape {d.shape}, expected {(m, n)}")
    if not exact_svd and scheme.rank > min(m, k, n):
        raise ParameterError(f"rank {scheme.rank} exceeds min dimension {min(m, k, n)}")
    bits = scheme.bits
    timer = PhaseTimer()
    with timer.phase("quantize"):
        aq = quantize(a, bits, Rounding.FLOOR)
        bq = quantize(b, bits, Rounding.FLOOR)
    with timer.phase("int_gemm"):
        c_int = int_gemm(aq, bq, scheme.kernel)
    with timer.phase("package"):
        c_f = dequant_result(c_int, aq.scale, bq.scale)
        a_f, b_f = dequantize(aq), dequantize(bq)
        r_a, r_b = a - a_f, b - b_f
    with timer.phase("rsvd"):
        if exact_svd:
            fa, fb = full_svd(r_a), full_svd(r_b)
        else:
            cfg = scheme.rsvd
            fa = rsvd(r_a, cfg)
            fb = rsvd(r_b, replace(cfg, seed=derive_seed(cfg.seed, 1)))
    with timer.phase("residual_terms"):
        rc1, rc2, rc3 = _residual_terms(fa, fb, a_f, b_f)
    with timer.phase("package"):
        c_f = c_f + rc1 + rc2 + rc3
        out = alpha * c_f
        if beta != 0.0:
            out = out + beta * d
    return GemmResult(out, scheme, timer.ns)


def lrqmm_full_rank_check(a, b, bits: int) -> float:
    """Relative error of LRQMM with exact full-rank residual SVDs (should be ~0)."""
    a, b = as_matrix(a, "A"), as_matrix(b, "B")
    _check_conformable(a, b)
    if min(a.shape[0], a.shape[1], b.shape[1]) > SMALL_SVD_MAX:
        raise ShapeError(f"full-rank check needs min dimension <= {SMALL_SVD_MAX}")
    c = matmul_exact(a, b)
    scheme = GemmScheme.lrqmm(bits, 1, oversampling=0, power_iters=0)
    res = lrqmm_gemm(a, b, scheme=scheme, exact_svd=True)
    if not np.any(c):
        return 0.0 if not np.any(res.D) else float("inf")
    return relative_error(c, res.D)


def run_scheme(a, b, scheme: GemmScheme) -> GemmResult:
    """Dispatch one scheme on ``A @ B`` (alpha=1, beta=0)."""
    kind = scheme.kind
    if kind is SchemeKind.EXACT:
        return GemmResult(matmul_exact(a, b), scheme, {})
    if kind is SchemeKind.DIRECT:
        res = direct_quant_gemm(a, b, scheme.bits, scheme.rounding, scheme.kernel)
    elif kind in (SchemeKind.QT_PARTIAL, SchemeKind.QT_FULL):
        terms = 4 if kind is SchemeKind.QT_FULL else 3
        res = qt_gemm(a, b, scheme.bits, terms, scheme.rounding, scheme.kernel)
    else:
        return lrqmm_gemm(a, b, scheme=scheme)
    res.scheme = scheme
    return res
