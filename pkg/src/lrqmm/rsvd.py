"""Randomized SVD: Gaussian range finder, small exact SVD, factor assembly.

The small SVD is a one-sided (Hestenes) Jacobi iteration on the short side of
the input. Pairs are visited in round-robin order so that every round rotates
disjoint column pairs at once, which keeps the inner loop in numpy.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError, ShapeError
from .matrix import DistributionSpec, as_matrix, generate

#: Largest short side accepted by :func:`small_svd`.
SMALL_SVD_MAX = 512
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 30

DEFAULT_OVERSAMPLING = 5
DEFAULT_POWER_ITERS = 1


@dataclass(frozen=True, eq=False)
class LowRankFactors:
    U: np.ndarray  # m x r, orthonormal columns
    sigma: np.ndarray  # r, nonincreasing, >= 0
    Vt: np.ndarray  # r x n, orthonormal rows

    @property
    def rank(self) -> int:
        return self.sigma.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.Vt.shape[1]

    def truncate(self, r: int) -> "LowRankFactors":
        return LowRankFactors(self.U[:, :r], self.sigma[:r], self.Vt[:r, :])


@dataclass(frozen=True)
class RsvdConfig:
    rank: int
    oversampling: int = DEFAULT_OVERSAMPLING
    power_iters: int = DEFAULT_POWER_ITERS
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise ParameterError("rank must be >= 1")
        if self.oversampling < 0 or self.power_iters < 0:
            raise ParameterError("oversampling and power_iters must be >= 0")

    @property
    def width(self) -> int:
        return self.rank + self.oversampling

    def check(self, shape: tuple[int, int]) -> None:
        if self.width > min(shape):
            raise ParameterError(
                f"rank + oversampling = {self.width} exceeds min dimension {min(shape)}"
            )


@lru_cache(maxsize=64)
def _round_robin(c: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Disjoint pair schedule covering every pair of ``c`` columns once."""
    players = list(range(c + (c % 2)))
    n = len(players)
    rounds = []
    for _ in range(n - 1):
        p, q = [], []
        for i in range(n // 2):
            a, b = players[i], players[n - 1 - i]
            if a < c and b < c:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _jacobi_columns(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonalise the columns of ``m`` in place; return (W, J) with W = m0 @ J."""
    c = m.shape[1]
    w = m
    j = np.eye(c)
    if c < 2:
        return w, j
    schedule = _round_robin(c)
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p, q in schedule:
            wp, wq = w[:, p], w[:, q]
            alpha = np.einsum("ij,ij->j", wp, wp)
            beta = np.einsum("ij,ij->j", wq, wq)
            gamma = np.einsum("ij,ij->j", wp, wq)
            active = np.abs(gamma) > JACOBI_TOL * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            wp, wq = w[:, p], w[:, q]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            cs = 1.0 / np.sqrt(1.0 + t * t)
            sn = cs * t
            w[:, p] = cs * wp - sn * wq
            w[:, q] = sn * wp + cs * wq
            jp, jq = j[:, p], j[:, q]
            j[:, p] = cs * jp - sn * jq
            j[:, q] = sn * jp + cs * jq
        if not rotated:
            break
    return w, j


def _complete_basis(u: np.ndarray, good: np.ndarray) -> np.ndarray:
    """Replace the columns of ``u`` not flagged ``good`` by an orthonormal completion."""
    bad = ~good
    if not bad.any():
        return u
    rows = u.shape[0]
    kept = u[:, good]
    if kept.shape[1]:
        full, _ = np.linalg.qr(kept, mode="complete")
        extra = full[:, kept.shape[1]:]
    else:
        extra = np.eye(rows)
    u = u.copy()
    u[:, bad] = extra[:, : int(bad.sum())]
    return u


def small_svd(b: np.ndarray) -> LowRankFactors:
    """Thin SVD of a matrix whose short side is at most :data:`SMALL_SVD_MAX`."""
    b = as_matrix(b, "B")
    rows, cols = b.shape
    if min(rows, cols) > SMALL_SVD_MAX:
        raise ShapeError(f"small_svd needs min dimension <= {SMALL_SVD_MAX}, got {b.shape}")
    wide = rows < cols
    m = np.array(b.T if wide else b, dtype=np.float64, order="F")
    w, j = _jacobi_columns(m)
    norms = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-norms, kind="stable")
    norms, w, j = norms[order], w[:, order], j[:, order]
    tiny = norms[0] * np.finfo(np.float64).eps * max(rows, cols) if norms.size else 0.0
    good = norms > tiny
    sigma = np.where(good, norms, 0.0)
    u = np.zeros_like(w)
    u[:, good] = w[:, good] / norms[good]
    u = _complete_basis(u, good)
    if wide:
        return LowRankFactors(np.ascontiguousarray(j), sigma, np.ascontiguousarray(u.T))
    return LowRankFactors(np.ascontiguousarray(u), sigma, np.ascontiguousarray(j.T))


def full_svd(a: np.ndarray) -> LowRankFactors:
    """Exact thin SVD used as the deterministic oracle path."""
    return small_svd(a)


def _orth(y: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(y, mode="reduced")
    return q


def gaussian_sketch(n: int, width: int, seed: int) -> np.ndarray:
    return generate(DistributionSpec("normal", (0.0, 1.0), seed), n, width)


def range_finder(a: np.ndarray, cfg: RsvdConfig) -> np.ndarray:
    """Orthonormal basis approximating the range of ``a`` (``m x (r+p)``)."""
    a = as_matrix(a, "A")
    cfg.check(a.shape)
    omega = gaussian_sketch(a.shape[1], cfg.width, cfg.seed)
    q = _orth(a @ omega)
    for _ in range(cfg.power_iters):
        z = _orth(a.T @ q)
        q = _orth(a @ z)
    return q


def rsvd(a: np.ndarray, cfg: RsvdConfig) -> LowRankFactors:
    """Rank-``cfg.rank`` randomized SVD of ``a``."""
    a = as_matrix(a, "A")
    q = range_finder(a, cfg)
    small = small_svd(q.T @ a)
    f = LowRankFactors(q @ small.U, small.sigma, small.Vt)
    return f.truncate(cfg.rank)


def reconstruct(f: LowRankFactors) -> np.ndarray:
    return (f.U * f.sigma) @ f.Vt
