"""Slow, independent reference computations (pure Python scalar loops).

Nothing here shares code paths with the fast implementations, so agreement
between the two is evidence of correctness rather than of self-consistency.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def scalar_matmul(a, b) -> list[list]:
    """Triple-loop product. Integer inputs stay Python ints (exact)."""
    a = np.asarray(a).tolist()
    b = np.asarray(b).tolist()
    m, k, n = len(a), len(b), len(b[0])
    if len(a[0]) != k:
        raise ValueError("shape mismatch")
    out = []
    for i in range(m):
        row = a[i]
        acc = [0] * n
        for p in range(k):
            aip = row[p]
            if aip:
                bp = b[p]
                for j in range(n):
                    acc[j] += aip * bp[j]
        out.append(acc)
    return out


def scalar_relative_error(exact, approx) -> float:
    num = den = 0.0
    for row_e, row_a in zip(np.asarray(exact).tolist(), np.asarray(approx).tolist()):
        for e, x in zip(row_e, row_a):
            num += (e - x) ** 2
            den += e * e
    return math.sqrt(num) / math.sqrt(den)


def jacobi_eigvalsh(s, tol: float = 1e-14, max_sweeps: int = 100) -> list[float]:
    """Eigenvalues of a small symmetric matrix by cyclic two-sided Jacobi, descending."""
    a = [list(map(float, row)) for row in np.asarray(s).tolist()]
    n = len(a)
    for _ in range(max_sweeps):
        off = sum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j)
        scale = sum(a[i][i] ** 2 for i in range(n))
        if off <= tol * tol * max(scale, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p][q] == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - sn * akq
                    a[k][q] = sn * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - sn * aqk
                    a[q][k] = sn * apk + c * aqk
    return sorted((a[i][i] for i in range(n)), reverse=True)


def singular_values_via_gram(b) -> list[float]:
    """Singular values as square roots of the eigenvalues of the smaller Gram matrix."""
    b = np.asarray(b, dtype=np.float64)
    m = b if b.shape[0] <= b.shape[1] else b.T
    rows = m.tolist()
    gram = [[sum(x * y for x, y in zip(ri, rj)) for rj in rows] for ri in rows]
    return [math.sqrt(max(ev, 0.0)) for ev in jacobi_eigvalsh(gram)]


def scalar_truncate_quantize(a, bits: int):
    """Truncation-toward-zero quantization, scalar loops. Returns (codes, scale).

    Codes are computed in exact rational arithmetic as trunc(qmax * x / max|x|),
    so lattice points are never lost to a rounded product.
    """
    rows = np.asarray(a, dtype=np.float64).tolist()
    top = 2 ** (bits - 1) - 1
    amax = max(abs(x) for row in rows for x in row)
    if amax == 0.0:
        return [[0] * len(r) for r in rows], 1.0
    lam = top / amax
    ratio = Fraction(top) / Fraction(amax)
    codes = [[max(-top, min(top, math.trunc(ratio * Fraction(x)))) for x in row] for row in rows]
    return codes, lam


def literal_compensated_product(a, b, bits: int, terms: int = 4):
    """Residual-compensated product assembled term by term with scalar loops."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a_int, la = scalar_truncate_quantize(a, bits)
    b_int, lb = scalar_truncate_quantize(b, bits)
    r_a = [[x - q / la for x, q in zip(row, qrow)] for row, qrow in zip(a.tolist(), a_int)]
    r_b = [[x - q / lb for x, q in zip(row, qrow)] for row, qrow in zip(b.tolist(), b_int)]
    ra_int, lra = scalar_truncate_quantize(r_a, bits)
    rb_int, lrb = scalar_truncate_quantize(r_b, bits)
    pieces = [
        (scalar_matmul(a_int, b_int), la * lb),
        (scalar_matmul(a_int, rb_int), la * lrb),
        (scalar_matmul(ra_int, b_int), lra * lb),
        (scalar_matmul(ra_int, rb_int), lra * lrb),
    ][:terms]
    m, n = a.shape[0], b.shape[1]
    return [[sum(p[i][j] / s for p, s in pieces) for j in range(n)] for i in range(m)]


def power_sigma1(a, iters: int = 500, tol: float = 1e-12, seed: int = 0) -> float:
    """Leading singular value by power iteration on A^T A."""
    a = np.asarray(a, dtype=np.float64)
    x = np.random.default_rng(seed).standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(iters):
        y = a.T @ (a @ x)
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        x = y / lam
        if abs(lam - prev) <= tol * lam:
            break
        prev = lam
    return math.sqrt(lam)
