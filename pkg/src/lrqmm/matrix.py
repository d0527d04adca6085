"""Dense matrices, seeded generation, norms and the float64 reference GEMM.

Matrices are plain 2-D ``float64`` numpy arrays. :func:`as_matrix` is the one
place where shape and finiteness are validated.

Random generation uses numpy's Philox counter-based bit generator, so a given
``(DistributionSpec, rows, cols)`` yields the same bits on every platform that
ships the same numpy sampling algorithms.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError

_U64 = (1 << 64) - 1

# canonical kind -> (display name, number of params)
_KINDS = {
    "normal": ("Normal", 2),
    "uniform": ("Uniform", 2),
    "exponential": ("Exponential", 1),
    "chisquare": ("ChiSquare", 1),
    "poisson": ("Poisson", 1),
}
_ALIASES = {
    "gaussian": "normal",
    "exponent": "exponential",
    "exp": "exponential",
    "chi2": "chisquare",
    "chisq": "chisquare",
}


@dataclass(frozen=True)
class DistributionSpec:
    """An i.i.d. entry distribution plus the seed that fixes the draw.

    ``params`` are ``(mean, stddev)`` for normal, ``(lo, hi)`` for uniform,
    ``(rate,)`` for exponential and poisson, ``(dof,)`` for chi-square.
    """

    kind: str
    params: tuple[float, ...]
    seed: int = 0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in _KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        _, nparams = _KINDS[kind]
        if len(params) != nparams:
            raise ParameterError(f"{kind} takes {nparams} parameter(s), got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise ParameterError("distribution parameters must be finite")
        if kind == "normal" and params[1] <= 0:
            raise ParameterError("normal stddev must be > 0")
        if kind == "uniform" and not params[0] < params[1]:
            raise ParameterError("uniform requires lo < hi")
        if kind in ("exponential", "poisson") and params[0] <= 0:
            raise ParameterError(f"{kind} rate must be > 0")
        if kind == "chisquare" and params[0] < 1:
            raise ParameterError("chi-square dof must be >= 1")
        object.__setattr__(self, "seed", int(self.seed) & _U64)

    @property
    def label(self) -> str:
        name, _ = _KINDS[self.kind]
        return f"{name}({','.join(_fmt_param(p) for p in self.params)})"

    def with_seed(self, seed: int) -> "DistributionSpec":
        return DistributionSpec(self.kind, self.params, seed)


def _fmt_param(p: float) -> str:
    return str(int(p)) if p.is_integer() else repr(p)


_DIST_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_]*)\s*\(([^()]*)\)\s*$")


def parse_distribution(text: str, seed: int = 0) -> DistributionSpec:
    """Parse ``"Name(p1,p2)"`` such as ``"Uniform(-1,1)"`` or ``"Poisson(10)"``."""
    m = _DIST_RE.match(text)
    if not m:
        raise ParameterError(f"cannot parse distribution {text!r}; expected NAME(P1[,P2])")
    name, args = m.groups()
    try:
        params = tuple(float(a) for a in args.split(",") if a.strip())
    except ValueError as exc:
        raise ParameterError(f"bad distribution parameters in {text!r}") from exc
    return DistributionSpec(name, params, seed)


#: The six input distributions of the accuracy tables, in table order.
TABLE_DISTRIBUTIONS = (
    "Normal(0,1)",
    "Uniform(0,1)",
    "Uniform(-1,1)",
    "Exponential(4)",
    "ChiSquare(1)",
    "Poisson(10)",
)


def derive_seed(seed: int, *stream: int) -> int:
    """Deterministically derive an independent 64-bit seed for a sub-stream."""
    ss = np.random.SeedSequence([int(seed) & _U64, *(int(s) & _U64 for s in stream)])
    return int(ss.generate_state(1, np.uint64)[0])


def generate(spec: DistributionSpec, rows: int, cols: int) -> np.ndarray:
    """Draw a ``rows x cols`` matrix of i.i.d. entries from ``spec``."""
    if rows < 1 or cols < 1:
        raise ParameterError("rows and cols must be >= 1")
    rng = np.random.Generator(np.random.Philox(spec.seed))
    shape = (rows, cols)
    p = spec.params
    if spec.kind == "normal":
        out = rng.normal(p[0], p[1], size=shape)
    elif spec.kind == "uniform":
        out = rng.uniform(p[0], p[1], size=shape)
    elif spec.kind == "exponential":
        out = rng.exponential(1.0 / p[0], size=shape)
    elif spec.kind == "chisquare":
        out = rng.chisquare(p[0], size=shape)
    else:
        out = rng.poisson(p[0], size=shape).astype(np.float64)
    return np.ascontiguousarray(out, dtype=np.float64)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a finite, non-empty 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ParameterError(f"{name} contains NaN or Inf")
    return arr


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(a, dtype=np.float64))))


def relative_error(exact: np.ndarray, approx: np.ndarray) -> float:
    """``||exact - approx||_F / ||exact||_F``."""
    exact = np.asarray(exact, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    if exact.shape != approx.shape:
        raise ShapeError(f"shape mismatch {exact.shape} vs {approx.shape}")
    ref = frobenius_norm(exact)
    if ref == 0.0:
        raise ParameterError("reference matrix has zero norm")
    return frobenius_norm(exact - approx) / ref


def matmul_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Double-precision product, the ground truth for every error measurement."""
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


@dataclass(frozen=True)
class MatrixStats:
    mean: float
    variance: float
    max_abs: float
    rows: int
    cols: int

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def stats(a: np.ndarray) -> MatrixStats:
    """Sample mean, 1/n-normalised variance and max absolute value."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        raise ShapeError("stats of an empty matrix")
    mean = float(np.mean(a))
    var = float(np.mean(np.square(a - mean)))
    return MatrixStats(mean, var, float(np.max(np.abs(a))), a.shape[0], a.shape[1])
