"""Closed-form error bounds for quantized GEMM and LRQMM.

Bounds that take leading singular values come in two flavours: an oracle form
fed with measured sigma_1/gamma_1 (a deterministic inequality), and an
estimate form that replaces them with mean/variance based estimates. The
estimate forms are approximate, so they are checked statistically with
:data:`STAT_SLACK` and :data:`STAT_PASS_RATE`.

Dimension convention: ``A`` is ``m x k``, ``B`` is ``k x n``, and the
derivations assume ``k <= m <= n``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ParameterError, RegimeError
from .matrix import MatrixStats

#: Multiplicative slack allowed on estimate-based bounds.
STAT_SLACK = 2.0
#: Fraction of trials an estimate-based bound must hold in.
STAT_PASS_RATE = 0.9
#: Floor residuals are asserted mean-dominated only from this size up.
CASE2_MIN_DIM = 100


class Regime(str, enum.Enum):
    CASE1 = "case1"  # kappa1 >= kappa2: noise dominated
    CASE2 = "case2"  # kappa1 < kappa2: mean dominated


@dataclass(frozen=True)
class SingularEstimate:
    kappa1: float
    kappa2: float
    rows: int = 0
    cols: int = 0

    @property
    def sigma1_est(self) -> float:
        return max(self.kappa1, self.kappa2)

    @property
    def sigma2_est(self) -> float:
        return min(self.kappa1, self.kappa2)

    @property
    def regime(self) -> Regime:
        return Regime.CASE1 if self.kappa1 >= self.kappa2 else Regime.CASE2

    @property
    def kappa1_unnormalized(self) -> float:
        """kappa1 rescaled by sqrt(long side), i.e. in raw singular-value units."""
        return self.kappa1 * math.sqrt(max(self.rows, self.cols))


def kappas(mu: float, s: float, rows: int, cols: int) -> SingularEstimate:
    lo, hi = sorted((rows, cols))
    kappa1 = abs(s * (1.0 + math.sqrt(lo / hi)))
    kappa2 = abs(mu) * math.sqrt(rows * cols)
    return SingularEstimate(kappa1, kappa2, rows, cols)


def estimate_singular(st: MatrixStats) -> SingularEstimate:
    """Leading singular value estimates of an i.i.d. matrix from its moments."""
    return kappas(st.mean, st.std, st.rows, st.cols)


def mp_edges(variance: float, y: float) -> tuple[float, float]:
    """Support ``[a, b]`` of the Marchenko-Pastur law with aspect ratio ``y``."""
    if variance < 0:
        raise ParameterError("variance must be >= 0")
    if not 0 < y <= 1:
        raise ParameterError("aspect ratio must lie in (0, 1]")
    root = math.sqrt(y)
    return variance * (1 - root) ** 2, variance * (1 + root) ** 2


@dataclass(frozen=True)
class BoundInputs:
    m: int
    k: int
    n: int
    lam1: float
    lam2: float
    mu: float | None = None
    s: float | None = None
    sigma1: float | None = None  # leading singular value of A (oracle)
    gamma1: float | None = None  # leading singular value of B (oracle)
    rank: int | None = None
    bits: int | None = None

    def __post_init__(self):
        if min(self.m, self.k, self.n) < 1:
            raise ParameterError("dimensions must be >= 1")
        if not (self.lam1 > 0 and self.lam2 > 0):
            raise ParameterError("scales must be > 0")
        if self.s is not None and self.s < 0:
            raise ParameterError("standard deviation must be >= 0")

    @property
    def lam(self) -> float:
        # single-scale forms: take the coarser of the two quantizers
        return min(self.lam1, self.lam2)

    @property
    def has_oracle(self) -> bool:
        return self.sigma1 is not None and self.gamma1 is not None

    @property
    def has_stats(self) -> bool:
        return self.mu is not None and self.s is not None

    def regime(self) -> Regime:
        if not self.has_stats:
            raise ParameterError("regime needs mean and standard deviation")
        return kappas(self.mu, self.s, self.m, self.k).regime


def quant_matrix_bound(m: int, n: int, lam: float) -> float:
    """Frobenius bound on the quantization error of an ``m x n`` matrix."""
    if m < 1 or n < 1 or not lam > 0:
        raise ParameterError("need positive dimensions and scale")
    return math.sqrt(m * n) / lam


def quant_gemm_bound_oracle(inp: BoundInputs) -> float:
    if not inp.has_oracle:
        raise ParameterError("oracle bound needs sigma1 and gamma1")
    m, k, n = inp.m, inp.k, inp.n
    il1, il2 = 1.0 / inp.lam1, 1.0 / inp.lam2
    return k * (
        inp.sigma1 * il2 * math.sqrt(n)
        + inp.gamma1 * il1 * math.sqrt(m)
        + il1 * il2 * math.sqrt(m * n)
    )


def quant_gemm_bound_estimate(inp: BoundInputs) -> float:
    m, k, n = inp.m, inp.k, inp.n
    il = 1.0 / inp.lam
    s, mu = inp.s, inp.mu
    if inp.regime() is Regime.CASE1:
        return k * il * (
            math.sqrt(n) * s * (1 + math.sqrt(k / m))
            + math.sqrt(m) * s * (1 + math.sqrt(n / k))
            + math.sqrt(m * n) * il
        )
    spread = math.sqrt(n) + math.sqrt(m) + math.sqrt(n * k / m) + math.sqrt(m * n / k)
    return k * il * (s * spread + 2 * abs(mu) * math.sqrt(m * n)) + il * il * math.sqrt(m * n)


def quant_gemm_bound(inp: BoundInputs) -> float:
    """Direct quantized GEMM error bound; oracle form when singular values are given."""
    if inp.has_oracle:
        return quant_gemm_bound_oracle(inp)
    if inp.has_stats:
        return quant_gemm_bound_estimate(inp)
    raise ParameterError("need either oracle singular values or mean/std")


def lrqmm_bound(inp: BoundInputs) -> float:
    """LRQMM error bound for rank ``inp.rank`` compensation (estimate form)."""
    if not inp.has_stats:
        raise ParameterError("lrqmm bound needs mean and standard deviation")
    if inp.rank is None or inp.rank < 0:
        raise ParameterError("lrqmm bound needs a rank")
    m, k, n, r = inp.m, inp.k, inp.n, inp.rank
    if r >= k - 1:
        raise ParameterError(f"rank {r} must be < k - 1 = {k - 1}")
    il = 1.0 / inp.lam
    s, mu = inp.s, inp.mu
    root = math.sqrt(k * (k - r))
    p1 = il * root * (
        (2 * s + il) * (1 + math.sqrt(k / m)) * (1 + math.sqrt(n / k))
        + il * math.sqrt(m) * (1 + math.sqrt(n / k))
    )
    if inp.regime() is Regime.CASE1:
        return p1
    spread = math.sqrt(n) + math.sqrt(m) + math.sqrt(n * k / m) + math.sqrt(m * n / k)
    return p1 + il * abs(mu) * root * spread


def error_ratio_bound(k: int, r: int, mu: float, s: float, lam: float, regime: Regime | None = None) -> float:
    """Bound on ||C - C_lrqmm|| / ||C - C_direct|| for square ``k x k`` operands."""
    if k <= r + 1:
        raise ParameterError(f"need k > r + 1, got k={k}, r={r}")
    if not lam > 0:
        raise ParameterError("scale must be > 0")
    if regime is None:
        regime = kappas(mu, s, k, k).regime
    regime = Regime(regime)
    il = 1.0 / lam
    tail = math.sqrt(k - r)
    if regime is Regime.CASE1:
        if s <= 0:
            raise RegimeError("noise-dominated ratio needs s > 0")
        return il * tail / (2 * s * math.sqrt(k)) + 2 * tail / k + il * tail / (s * k)
    if mu == 0:
        raise RegimeError("mean-dominated ratio is undefined for zero mean")
    amu = abs(mu)
    return tail * (2 * amu + il) / (k * amu) + math.sqrt(k) * tail * (8 * s + 4 * il) / (2 * k * k * amu)


def case1_ratio_limit(bits: int) -> float:
    """Large-k limit of the noise-dominated ratio when lambda*s is at its maximum."""
    return 1.0 / (2**bits - 2)


def rsvd_expected_bound(m: int, n: int, r: int, q: int, sigma_next: float) -> float:
    """Expected spectral-norm error envelope of a rank-r randomized SVD."""
    if r < 2:
        raise ParameterError("rank must be >= 2")
    if q < 0 or sigma_next < 0:
        raise ParameterError("need q >= 0 and sigma_next >= 0")
    return (1 + 4 * math.sqrt(2 * min(m, n) / (r - 1))) ** (1.0 / (2 * q + 1)) * sigma_next


def svd_truncation_bound(p: int, r: int, sigma_next: float) -> float:
    """Frobenius bound on the rank-r truncation of a rank-p matrix."""
    if r >= p:
        raise ParameterError(f"kept rank {r} must be < true rank {p}")
    return sigma_next * math.sqrt(p - r)
