"""Experiment drivers behind the CLI commands.

Each driver takes an :class:`ExperimentConfig` and returns an :class:`Outcome`
holding flat rows (for CSV) or per-trial records (for JSON). Trials are pure
functions of ``(distribution, size, bits, rank, seed)`` and run in config
order, so output ordering never depends on timing.
"""
from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .. import oracles
from ..bounds import (
    STAT_PASS_RATE,
    STAT_SLACK,
    BoundInputs,
    Regime,
    case1_ratio_limit,
    error_ratio_bound,
    estimate_singular,
    kappas,
    lrqmm_bound,
    quant_gemm_bound_estimate,
    quant_gemm_bound_oracle,
    quant_matrix_bound,
    rsvd_expected_bound,
    svd_truncation_bound,
)
from ..errors import ParameterError
from ..matrix import (
    DistributionSpec,
    derive_seed,
    frobenius_norm,
    generate,
    matmul_exact,
    parse_distribution,
    relative_error,
    stats,
)
from ..qgemm import (
    GemmScheme,
    SchemeKind,
    direct_quant_gemm,
    int_gemm,
    lrqmm_full_rank_check,
    lrqmm_gemm,
    qt_gemm,
    run_scheme,
)
from ..quantize import QuantizedMatrix, Rounding, dequantize, qmax, quantize
from ..rsvd import RsvdConfig, reconstruct, rsvd, small_svd
from ..timing import PHASES
from .config import ExperimentConfig, rank_for, scale_size

#: Headline statistic over seeds, echoed into every record.
STATISTIC = "median"
#: Largest dimension at which the truncation bound is checked per trial.
TRUNCATION_CHECK_MAX_DIM = 64
#: Relative allowance for float rounding on deterministic inequalities.
ROUNDING_ALLOWANCE = 1e-12

ORACLE_GEMM_SIZE = 200
ORACLE_QT_SIZE = 20
ORACLE_SVD_SHAPES = ((8, 5), (5, 8))
ORACLE_IDENTITY_SIZE = 50
QT_TOLERANCE = 1e-12
SVD_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-9


@dataclass
class Outcome:
    """Result of one command: CSV-style rows or JSON-style trials plus a summary."""

    command: str
    config: ExperimentConfig
    header: list[str] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    trials: list[dict] | None = None
    summary: dict = field(default_factory=dict)
    ok: bool = True


# ---------------------------------------------------------------------------
# trial plumbing


def trial_operands(spec: DistributionSpec, size, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """A (m x k) and B (k x n) drawn from independent sub-streams of ``seed``."""
    m, k, n = size
    a = generate(spec.with_seed(derive_seed(seed, 0)), m, k)
    b = generate(spec.with_seed(derive_seed(seed, 1)), k, n)
    return a, b


def lrqmm_scheme(bits: int, rank: int, seed: int, cfg: ExperimentConfig, min_dim: int) -> GemmScheme:
    # oversampling shrinks near full rank so that r + p never exceeds the matrix
    p = max(0, min(cfg.oversampling, min_dim - rank))
    rc = RsvdConfig(rank, p, cfg.power_iters, derive_seed(seed, 2))
    return GemmScheme(SchemeKind.LRQMM, bits, rank, rc, kernel=cfg.kernel)


def _sizes(cfg: ExperimentConfig) -> list[tuple[int, int, int]]:
    if not cfg.sizes:
        raise ParameterError(f"{cfg.command} needs at least one size")
    return [scale_size(s, cfg.scale) for s in cfg.sizes]


def _distributions(cfg: ExperimentConfig) -> list[DistributionSpec]:
    if not cfg.distributions:
        raise ParameterError(f"{cfg.command} needs at least one distribution")
    return [parse_distribution(d) for d in cfg.distributions]


def _require_bits(cfg: ExperimentConfig) -> None:
    if not cfg.bits:
        raise ParameterError("at least one bit width is required")


def _summarize(errs: list[float]) -> dict:
    return {
        "seed_count": len(errs),
        "median_rel_err": statistics.median(errs),
        "mean_rel_err": math.fsum(errs) / len(errs),
        "min_rel_err": min(errs),
        "max_rel_err": max(errs),
    }


def _le(measured: float, bound: float) -> bool:
    return measured <= bound * (1.0 + ROUNDING_ALLOWANCE)


# ---------------------------------------------------------------------------
# error-table


ERROR_TABLE_HEADER = [
    "distribution", "scheme", "bits", "size_m", "size_k", "size_n", "rank",
    "seed_count", "median_rel_err", "min_rel_err", "max_rel_err",
]


def error_table(cfg: ExperimentConfig) -> Outcome:
    """Median relative error per (distribution, scheme) over seeds."""
    cfg.validate()
    _require_bits(cfg)
    if not cfg.schemes:
        raise ParameterError("scheme list is empty")
    rows = []
    for spec in _distributions(cfg):
        for size in _sizes(cfg):
            md = min(size)
            for bits in cfg.bits:
                errs: dict[tuple[str, str], list[float]] = defaultdict(list)
                for seed in cfg.seeds:
                    a, b = trial_operands(spec, size, seed)
                    c = matmul_exact(a, b)
                    for name in cfg.schemes:
                        kind = SchemeKind(name)
                        if kind is SchemeKind.LRQMM:
                            for policy in cfg.ranks:
                                r = rank_for(policy, md)
                                res = lrqmm_gemm(a, b, scheme=lrqmm_scheme(bits, r, seed, cfg, md))
                                errs[(name, str(r))].append(relative_error(c, res.D))
                        else:
                            res = run_scheme(a, b, GemmScheme(kind, bits, kernel=cfg.kernel))
                            errs[(name, "")].append(relative_error(c, res.D))
                for (name, r), e in errs.items():
                    s = _summarize(e)
                    rows.append({
                        "distribution": spec.label, "scheme": name, "bits": bits,
                        "size_m": size[0], "size_k": size[1], "size_n": size[2], "rank": r,
                        "seed_count": s["seed_count"], "median_rel_err": s["median_rel_err"],
                        "min_rel_err": s["min_rel_err"], "max_rel_err": s["max_rel_err"],
                    })
    return Outcome(cfg.command, cfg, ERROR_TABLE_HEADER, rows, summary={"statistic": STATISTIC})


# ---------------------------------------------------------------------------
# rank-sweep / dim-sweep


RANK_SWEEP_HEADER = [
    "distribution", "bits", "size_m", "size_k", "size_n", "rank", "oversampling", "exact_svd",
    "seed_count", "mean_rel_err", "median_rel_err", "min_rel_err", "max_rel_err",
]


def rank_sweep(cfg: ExperimentConfig) -> Outcome:
    """LRQMM error against the compensation rank.

    With ``exact_svd`` enabled, a rank equal to the smallest dimension uses
    exact full SVDs of the residuals instead of sketches.
    """
    cfg.validate()
    _require_bits(cfg)
    rows = []
    for spec in _distributions(cfg):
        for size in _sizes(cfg):
            md = min(size)
            ranks = [rank_for(p, md) for p in cfg.ranks]
            for r in ranks:
                if r > md:
                    raise ParameterError(f"rank {r} exceeds the smallest dimension {md}")
            for bits in cfg.bits:
                for r in ranks:
                    exact = cfg.exact_svd and r == md
                    errs, p_used = [], 0
                    for seed in cfg.seeds:
                        a, b = trial_operands(spec, size, seed)
                        c = matmul_exact(a, b)
                        scheme = lrqmm_scheme(bits, r, seed, cfg, md)
                        p_used = scheme.rsvd.oversampling
                        res = lrqmm_gemm(a, b, scheme=scheme, exact_svd=exact)
                        errs.append(relative_error(c, res.D))
                    s = _summarize(errs)
                    rows.append({
                        "distribution": spec.label, "bits": bits,
                        "size_m": size[0], "size_k": size[1], "size_n": size[2], "rank": r,
                        "oversampling": 0 if exact else p_used, "exact_svd": int(exact),
                        **{k: s[k] for k in RANK_SWEEP_HEADER[8:]},
                    })
    return Outcome(cfg.command, cfg, RANK_SWEEP_HEADER, rows, summary={"statistic": STATISTIC})


DIM_SWEEP_HEADER = [
    "distribution", "bits", "rank_policy", "size_m", "size_k", "size_n", "rank",
    "seed_count", "median_rel_err", "mean_rel_err", "min_rel_err", "max_rel_err",
]


def dim_sweep(cfg: ExperimentConfig) -> Outcome:
    """LRQMM error against matrix size for each rank policy."""
    cfg.validate()
    _require_bits(cfg)
    rows = []
    for spec in _distributions(cfg):
        for bits in cfg.bits:
            for policy in cfg.ranks:
                for size in _sizes(cfg):
                    md = min(size)
                    r = min(rank_for(policy, md), md)
                    errs = []
                    for seed in cfg.seeds:
                        a, b = trial_operands(spec, size, seed)
                        c = matmul_exact(a, b)
                        res = lrqmm_gemm(a, b, scheme=lrqmm_scheme(bits, r, seed, cfg, md))
                        errs.append(relative_error(c, res.D))
                    s = _summarize(errs)
                    rows.append({
                        "distribution": spec.label, "bits": bits, "rank_policy": policy,
                        "size_m": size[0], "size_k": size[1], "size_n": size[2], "rank": r,
                        **{k: s[k] for k in DIM_SWEEP_HEADER[7:]},
                    })
    return Outcome(cfg.command, cfg, DIM_SWEEP_HEADER, rows, summary={"statistic": STATISTIC})


# ---------------------------------------------------------------------------
# bound-check


def _pooled_stats(a, b):
    both = np.concatenate([a.ravel(), b.ravel()])[None, :]
    return stats(both)


def bound_trial(spec: DistributionSpec, size, bits: int, rank: int, seed: int, cfg: ExperimentConfig) -> dict:
    """Measured errors against every applicable bound for one operand pair."""
    m, k, n = size
    a, b = trial_operands(spec, size, seed)
    c = matmul_exact(a, b)
    aq, bq = quantize(a, bits, Rounding.TRUNCATE), quantize(b, bits, Rounding.TRUNCATE)
    err_qa = frobenius_norm(a - dequantize(aq))
    err_qb = frobenius_norm(b - dequantize(bq))
    err_dq = frobenius_norm(c - direct_quant_gemm(a, b, bits, kernel=cfg.kernel).D)
    md = min(size)
    err_lr = frobenius_norm(c - lrqmm_gemm(a, b, scheme=lrqmm_scheme(bits, rank, seed, cfg, md)).D)
    st = _pooled_stats(a, b)
    sigma1 = float(np.linalg.norm(a, 2))
    gamma1 = float(np.linalg.norm(b, 2))
    inp = BoundInputs(m, k, n, aq.scale, bq.scale, st.mean, st.std, sigma1, gamma1, rank, bits)
    regime = inp.regime()
    est_a = estimate_singular(stats(a))

    measured = {
        "quant_err_a": err_qa,
        "quant_err_b": err_qb,
        "direct_err": err_dq,
        "lrqmm_err": err_lr,
        "error_ratio": err_lr / err_dq,
        "sigma1": sigma1,
        "gamma1": gamma1,
        "sigma1_normalized": sigma1 / math.sqrt(max(m, k)),
        "mean": st.mean,
        "std": st.std,
    }
    bounds = {
        "regime": regime.value,
        "quant_matrix_a": quant_matrix_bound(m, k, aq.scale),
        "quant_matrix_b": quant_matrix_bound(k, n, bq.scale),
        "quant_gemm_oracle": quant_gemm_bound_oracle(inp),
        "quant_gemm_estimate": quant_gemm_bound_estimate(inp),
        "sigma1_estimate": est_a.sigma1_est,
        "kappa1": est_a.kappa1,
        "kappa1_raw": est_a.kappa1_unnormalized,
        "kappa2": est_a.kappa2,
    }
    passed = {
        "quant_matrix": _le(err_qa, bounds["quant_matrix_a"]) and _le(err_qb, bounds["quant_matrix_b"]),
        "quant_gemm_oracle": _le(err_dq, bounds["quant_gemm_oracle"]),
        "quant_gemm_estimate": err_dq <= STAT_SLACK * bounds["quant_gemm_estimate"],
    }
    if rank < k - 1:
        bounds["lrqmm"] = lrqmm_bound(inp)
        passed["lrqmm"] = err_lr <= STAT_SLACK * bounds["lrqmm"]
        bounds["error_ratio"] = error_ratio_bound(k, rank, st.mean, st.std, inp.lam, regime)
        passed["error_ratio"] = measured["error_ratio"] <= STAT_SLACK * bounds["error_ratio"]
    if max(m, k) <= TRUNCATION_CHECK_MAX_DIM:
        r_a = a - dequantize(quantize(a, bits, Rounding.FLOOR))
        f = small_svd(r_a)
        p = int(np.count_nonzero(f.sigma > 0))  # numerical rank
        if rank < p:
            measured["truncation_err"] = frobenius_norm(r_a - reconstruct(f.truncate(rank)))
            bounds["truncation"] = svd_truncation_bound(p, rank, float(f.sigma[rank]))
            passed["truncation"] = _le(measured["truncation_err"], bounds["truncation"])
    return {
        "config": {"distribution": spec.label, "size": list(size), "bits": bits, "rank": rank, "seed": seed},
        "measured": measured,
        "bounds": bounds,
        "timings_ns": {},
        "pass": passed,
    }


def rsvd_mean_check(spec: DistributionSpec, size, bits: int, rank: int, cfg: ExperimentConfig) -> dict:
    """Mean spectral error of repeated sketches of one floor residual vs. the expected bound."""
    m, k, _ = size
    a, _ = trial_operands(spec, size, cfg.seeds[0])
    r_a = a - dequantize(quantize(a, bits, Rounding.FLOOR))
    sv = np.linalg.svd(r_a, compute_uv=False)
    p = max(0, min(cfg.oversampling, min(m, k) - rank))
    errs = []
    for seed in cfg.seeds:
        f = rsvd(r_a, RsvdConfig(rank, p, cfg.power_iters, derive_seed(seed, 3)))
        errs.append(float(np.linalg.norm(r_a - reconstruct(f), 2)))
    mean_err = math.fsum(errs) / len(errs)
    bound = rsvd_expected_bound(m, k, rank, cfg.power_iters, float(sv[rank]))
    return {
        "config": {"distribution": spec.label, "size": list(size), "bits": bits, "rank": rank,
                   "seed_count": len(errs), "check": "rsvd_expected"},
        "measured": {"mean_spectral_err": mean_err, "max_spectral_err": max(errs), "sigma_next": float(sv[rank])},
        "bounds": {"rsvd_expected": bound},
        "timings_ns": {},
        "pass": {"rsvd_expected": _le(mean_err, bound)},
    }


DETERMINISTIC_CHECKS = ("quant_matrix", "quant_gemm_oracle", "truncation", "rsvd_expected")
STATISTICAL_CHECKS = ("quant_gemm_estimate", "lrqmm")
INFORMATIONAL_CHECKS = ("error_ratio",)


def _pass_rates(trials: list[dict]) -> dict:
    counts: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for t in trials:
        for name, ok in t["pass"].items():
            counts[name][0] += bool(ok)
            counts[name][1] += 1
    return {name: {"passed": p, "total": n, "rate": p / n} for name, (p, n) in counts.items()}


def ratio_trend(trials: list[dict]) -> list[dict]:
    """Median LRQMM/direct error ratio per (distribution, bits) as size grows."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    for t in trials:
        if "error_ratio" not in t["measured"]:
            continue
        c = t["config"]
        groups[(c["distribution"], c["bits"], c["size"][1])].append(t["measured"]["error_ratio"])
    return [
        {"distribution": d, "bits": bits, "k": k, "median_ratio": statistics.median(v),
         "case1_limit": case1_ratio_limit(bits)}
        for (d, bits, k), v in groups.items()
    ]


def bound_check(cfg: ExperimentConfig) -> Outcome:
    cfg.validate()
    _require_bits(cfg)
    policy = cfg.ranks[0] if cfg.ranks else "10"
    trials = []
    for spec in _distributions(cfg):
        for size in _sizes(cfg):
            r = max(1, min(rank_for(policy, min(size)), min(size) - 2))
            for bits in cfg.bits:
                for seed in cfg.seeds:
                    trials.append(bound_trial(spec, size, bits, r, seed, cfg))
                if r >= 2:
                    trials.append(rsvd_mean_check(spec, size, bits, r, cfg))
    rates = _pass_rates(trials)
    det_ok = all(rates[c]["rate"] == 1.0 for c in DETERMINISTIC_CHECKS if c in rates)
    stat_ok = all(rates[c]["rate"] >= STAT_PASS_RATE for c in STATISTICAL_CHECKS if c in rates)
    summary = {
        "pass_rates": rates,
        "slack": STAT_SLACK,
        "required_pass_rate": STAT_PASS_RATE,
        "deterministic": list(DETERMINISTIC_CHECKS),
        "statistical": list(STATISTICAL_CHECKS),
        "informational": list(INFORMATIONAL_CHECKS),
        "deterministic_ok": det_ok,
        "statistical_ok": stat_ok,
        "ratio_trend": ratio_trend(trials),
    }
    return Outcome(cfg.command, cfg, trials=trials, summary=summary, ok=det_ok and stat_ok)


def ratio_study(spec: DistributionSpec, size, bits: int, rank: int, seeds, cfg: ExperimentConfig) -> dict:
    """LRQMM/direct error ratio at one size, with the regime's envelope and limit."""
    m, k, n = size
    ratios, envelopes = [], []
    regime = None
    for seed in seeds:
        a, b = trial_operands(spec, size, seed)
        c = matmul_exact(a, b)
        dq = direct_quant_gemm(a, b, bits, kernel=cfg.kernel).D
        lr = lrqmm_gemm(a, b, scheme=lrqmm_scheme(bits, rank, seed, cfg, min(size))).D
        ratios.append(frobenius_norm(c - lr) / frobenius_norm(c - dq))
        st = _pooled_stats(a, b)
        lam = min(quantize(a, bits).scale, quantize(b, bits).scale)
        regime = kappas(st.mean, st.std, m, k).regime
        envelopes.append(error_ratio_bound(k, rank, st.mean, st.std, lam, regime))
    return {
        "distribution": spec.label, "bits": bits, "k": k, "rank": rank, "regime": regime.value,
        "median_ratio": statistics.median(ratios), "median_envelope": statistics.median(envelopes),
        "case1_limit": case1_ratio_limit(bits),
    }


# ---------------------------------------------------------------------------
# profile


PROFILE_HEADER = [
    "size_m", "size_k", "size_n", "rank", "kernel",
    *(f"{p}_ns" for p in PHASES), "total_ns", "overhead_ns", "overhead_fraction",
]
PROFILE_TIMING_COLUMNS = [c for c in PROFILE_HEADER if c.endswith("_ns") or c == "overhead_fraction"]


def loglog_slope(sizes, times) -> float:
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(times, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def profile(cfg: ExperimentConfig) -> Outcome:
    """Per-phase LRQMM wall time; warm-up discarded, minimum over repetitions."""
    cfg.validate()
    _require_bits(cfg)
    sizes = _sizes(cfg)
    if len({s[0] for s in sizes}) < 2:
        raise ParameterError("profile needs at least two distinct sizes")
    spec = _distributions(cfg)[0]
    bits = cfg.bits[0]
    rows = []
    for size in sizes:
        md = min(size)
        r = min(rank_for(cfg.ranks[0], md), md)
        a, b = trial_operands(spec, size, cfg.seeds[0])
        scheme = lrqmm_scheme(bits, r, cfg.seeds[0], cfg, md)
        lrqmm_gemm(a, b, scheme=scheme)
        best = {p: math.inf for p in PHASES}
        for _ in range(cfg.reps):
            t = lrqmm_gemm(a, b, scheme=scheme).timings
            for p in PHASES:
                best[p] = min(best[p], t.get(p, 0))
        total = sum(best.values())
        overhead = total - best["int_gemm"]
        rows.append({
            "size_m": size[0], "size_k": size[1], "size_n": size[2], "rank": r, "kernel": cfg.kernel,
            **{f"{p}_ns": best[p] for p in PHASES},
            "total_ns": total, "overhead_ns": overhead, "overhead_fraction": overhead / total,
        })
    xs = [row["size_m"] for row in rows]
    fractions = [row["overhead_fraction"] for row in rows]
    summary = {
        "int_gemm_slope": loglog_slope(xs, [row["int_gemm_ns"] for row in rows]),
        "overhead_slope": loglog_slope(xs, [row["overhead_ns"] for row in rows]),
        "overhead_fraction_first": fractions[0],
        "overhead_fraction_last": fractions[-1],
        "overhead_fraction_decreasing": all(y < x for x, y in zip(fractions, fractions[1:])),
        "timing": "monotonic wall clock, warm-up discarded, per-phase minimum",
    }
    return Outcome(cfg.command, cfg, PROFILE_HEADER, rows, summary=summary)


# ---------------------------------------------------------------------------
# oracle-verify


def _code_matrix(rows: int, cols: int, bits: int, seed: int) -> QuantizedMatrix:
    rng = np.random.Generator(np.random.Philox(seed))
    top = qmax(bits)
    vals = rng.integers(-top, top + 1, size=(rows, cols), dtype=np.int64)
    return QuantizedMatrix(vals, bits, 1.0, Rounding.NEAREST)


def _check(name: str, params: dict, measured: dict, tolerance: float, ok: bool) -> dict:
    return {
        "config": {"check": name, **params},
        "measured": measured,
        "bounds": {"tolerance": tolerance},
        "timings_ns": {},
        "pass": {name: bool(ok)},
    }


def _check_int_gemm(bits: int, seed: int, fault: str | None) -> list[dict]:
    s = ORACLE_GEMM_SIZE
    aq = _code_matrix(s, s, bits, derive_seed(seed, 10, bits))
    bq = _code_matrix(s, s, bits, derive_seed(seed, 11, bits))
    ref = np.asarray(oracles.scalar_matmul(aq.values, bq.values), dtype=np.float64)
    out = []
    for kernel in ("float", "int64"):
        got = np.asarray(int_gemm(aq, bq, kernel), dtype=np.float64)
        if fault == "int_gemm":
            got = got.copy()
            got[0, 0] += 1.0
        diff = int(np.count_nonzero(got != ref))
        out.append(_check("int_gemm", {"bits": bits, "size": s, "kernel": kernel},
                          {"mismatched_entries": diff}, 0.0, diff == 0))
    return out


def _check_qt(bits: int, seed: int, fault: str | None) -> list[dict]:
    s = ORACLE_QT_SIZE
    out = []
    for dist in ("Normal(0,1)", "Uniform(0,1)"):
        a, b = trial_operands(parse_distribution(dist), (s, s, s), seed)
        terms = 3 if fault == "qt_assembly" else 4
        got = qt_gemm(a, b, bits, terms=terms).D
        ref = np.asarray(oracles.literal_compensated_product(a, b, bits), dtype=np.float64)
        rel = relative_error(ref, got)
        out.append(_check("qt_assembly", {"bits": bits, "size": s, "distribution": dist},
                          {"rel_diff": rel}, QT_TOLERANCE, rel <= QT_TOLERANCE))
    return out


def _check_small_svd(seed: int, fault: str | None) -> list[dict]:
    out = []
    for i, (r, c) in enumerate(ORACLE_SVD_SHAPES):
        b = generate(parse_distribution("Normal(0,1)", derive_seed(seed, 20, i)), r, c)
        sig = small_svd(b).sigma
        if fault == "small_svd":
            sig = sig * (1 + 1e-6)
        ref = np.asarray(oracles.singular_values_via_gram(b))
        diff = float(np.max(np.abs(sig[: ref.size] - ref)) / ref[0])
        out.append(_check("small_svd", {"shape": [r, c]}, {"rel_diff": diff}, SVD_TOLERANCE, diff <= SVD_TOLERANCE))
    return out


def _check_identity(bits: int, seed: int, fault: str | None) -> list[dict]:
    s = ORACLE_IDENTITY_SIZE
    out = []
    for dist in ("Uniform(0,1)", "Normal(0,1)"):
        a, b = trial_operands(parse_distribution(dist), (s, s, s), seed)
        if fault == "identity":
            # compensation computed from slightly different operands
            err = relative_error(matmul_exact(a, b), lrqmm_gemm(
                a * (1 + 1e-6), b, scheme=GemmScheme.lrqmm(bits, 1, oversampling=0, power_iters=0),
                exact_svd=True).D)
        else:
            err = lrqmm_full_rank_check(a, b, bits)
        out.append(_check("full_rank_identity", {"bits": bits, "size": s, "distribution": dist},
                          {"rel_err": err}, IDENTITY_TOLERANCE, err <= IDENTITY_TOLERANCE))
    return out


def oracle_verify(cfg: ExperimentConfig) -> Outcome:
    """Brute-force equivalence checks of the fast kernels against slow oracles."""
    cfg.validate()
    _require_bits(cfg)
    seed = cfg.seeds[0]
    trials = []
    for bits in cfg.bits:
        trials += _check_int_gemm(bits, seed, cfg.fault)
    for bits in cfg.bits:
        trials += _check_qt(bits, seed, cfg.fault)
    trials += _check_small_svd(seed, cfg.fault)
    for bits in cfg.bits:
        trials += _check_identity(bits, seed, cfg.fault)
    rates = _pass_rates(trials)
    ok = all(v["rate"] == 1.0 for v in rates.values())
    return Outcome(cfg.command, cfg, trials=trials, summary={"pass_rates": rates, "all_pass": ok}, ok=ok)


RUNNERS = {
    "error-table": error_table,
    "rank-sweep": rank_sweep,
    "dim-sweep": dim_sweep,
    "bound-check": bound_check,
    "profile": profile,
    "oracle-verify": oracle_verify,
}


def run(cfg: ExperimentConfig) -> Outcome:
    return RUNNERS[cfg.command](cfg)
