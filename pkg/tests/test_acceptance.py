"""Acceptance suite: one test per criterion, each printing a single verdict line.

Run with ``pytest tests/test_acceptance.py -v -s``. Everything runs at full
desk scale (2000^2 for the tables) and takes several minutes on one CPU.
"""
import statistics

import pytest

from lrqmm.bounds import STAT_PASS_RATE, case1_ratio_limit
from lrqmm.harness import cli
from lrqmm.harness.config import ExperimentConfig, default_config
from lrqmm.harness.experiments import (
    ERROR_TABLE_HEADER,
    bound_check,
    dim_sweep,
    error_table,
    oracle_verify,
    profile,
    rank_sweep,
    ratio_study,
)
from lrqmm.matrix import TABLE_DISTRIBUTIONS, parse_distribution

pytestmark = pytest.mark.slow

TABLE_SIZE = 2000
TABLE_SEEDS = [1, 2, 3, 4, 5]

INT4_DIRECT = {
    "Normal(0,1)": 5.69e-1, "Uniform(0,1)": 2.59e-1, "Uniform(-1,1)": 2.39e-1,
    "Exponential(4)": 9.11e-1, "ChiSquare(1)": 9.52e-1, "Poisson(10)": 3.68e-1,
}
INT4_LRQMM = {"Uniform(0,1)": 1.46e-3, "Exponential(4)": 9.91e-3, "ChiSquare(1)": 4.72e-2, "Poisson(10)": 9.55e-4}
INT8_LRQMM = {"Uniform(0,1)": 8.14e-5, "Exponential(4)": 5.86e-4, "Poisson(10)": 4.89e-5}
ZERO_MEAN = ("Normal(0,1)", "Uniform(-1,1)")


def verdict(n, ok, detail):
    print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}")
    return ok


def within(x, ref, factor):
    return ref / factor <= x <= ref * factor


@pytest.fixture(scope="module")
def table():
    cfg = ExperimentConfig(
        "error-table", list(TABLE_DISTRIBUTIONS), [(TABLE_SIZE,) * 3], bits=[4, 8],
        schemes=["direct", "lrqmm"], seeds=TABLE_SEEDS,
    )
    out = error_table(cfg)
    return {(r["distribution"], r["scheme"], r["bits"]): r["median_rel_err"] for r in out.rows}


@pytest.fixture(scope="module")
def bounds_report():
    return bound_check(default_config("bound-check"))


def test_criterion_01_int4_table(table):
    notes, ok = [], True
    for d, ref in INT4_LRQMM.items():
        v = table[(d, "lrqmm", 4)]
        ok &= within(v, ref, 3)
        notes.append(f"LRQMM {d} {v:.3g}/{ref:.3g}")
    for d, ref in INT4_DIRECT.items():
        v = table[(d, "direct", 4)]
        ok &= within(v, ref, 3)
        notes.append(f"DQ {d} {v:.3g}/{ref:.3g}")
    for d in ZERO_MEAN:
        ok &= table[(d, "lrqmm", 4)] <= table[(d, "direct", 4)]
    assert verdict(1, ok, "; ".join(notes))


def test_criterion_02_int8_table(table):
    notes, ok = [], True
    for d, ref in INT8_LRQMM.items():
        v = table[(d, "lrqmm", 8)]
        ok &= within(v, ref, 5)
        notes.append(f"LRQMM {d} {v:.3g}/{ref:.3g}")
    for d in TABLE_DISTRIBUTIONS:
        lr, dq = table[(d, "lrqmm", 8)], table[(d, "direct", 8)]
        ok &= lr < dq
        notes.append(f"{d} {lr:.3g}<{dq:.3g}")
    assert verdict(2, ok, "; ".join(notes))


def test_criterion_03_order_of_magnitude(table):
    gains = {d: table[(d, "direct", 4)] / table[(d, "lrqmm", 4)]
             for d in ("Uniform(0,1)", "Exponential(4)", "Poisson(10)")}
    ok = all(g >= 10 for g in gains.values())
    assert verdict(3, ok, ", ".join(f"{d} x{g:.0f}" for d, g in gains.items()))


def test_criterion_04_rank_sweep():
    cfg = default_config("rank-sweep")
    assert len(cfg.seeds) >= 10
    rows = rank_sweep(cfg).rows
    means = [r["mean_rel_err"] for r in rows]
    inversions = [(a, b) for a, b in zip(means, means[1:]) if b > a]
    mono = len(inversions) <= 1 and all(b <= a * 1.05 for a, b in inversions)
    last = rows[-1]
    exact_ok = last["exact_svd"] == 1 and last["max_rel_err"] <= 1e-9
    detail = f"ranks {[r['rank'] for r in rows]}, inversions {len(inversions)}, full-rank max err {last['max_rel_err']:.2e}"
    assert verdict(4, mono and exact_ok, detail)


def test_criterion_05_dim_sweep():
    cfg = ExperimentConfig("dim-sweep", ["Uniform(0,1)"], [(200,) * 3, (2000,) * 3],
                           ranks=["10"], seeds=list(range(1, 11)))
    rows = dim_sweep(cfg).rows
    small, large = rows[0]["median_rel_err"], rows[1]["median_rel_err"]
    assert verdict(5, large <= small, f"median at 200 {small:.3g}, at 2000 {large:.3g}")


def test_criterion_06_deterministic_bounds(bounds_report):
    rates = bounds_report.summary["pass_rates"]
    per_size = {}
    for t in bounds_report.trials:
        if "quant_gemm_oracle" in t["pass"]:
            per_size.setdefault(t["config"]["size"][0], []).append(
                t["pass"]["quant_matrix"] and t["pass"]["quant_gemm_oracle"])
    ok = sorted(per_size) == [50, 200, 500] and all(len(v) >= 100 and all(v) for v in per_size.values())
    ok &= rates["truncation"]["total"] >= 50 and rates["truncation"]["rate"] == 1.0
    detail = (f"quant trials per size {{{', '.join(f'{s}: {sum(v)}/{len(v)}' for s, v in per_size.items())}}}, "
              f"truncation {rates['truncation']['passed']}/{rates['truncation']['total']}")
    assert verdict(6, ok, detail)


def test_criterion_07_statistical_bounds(bounds_report):
    rates = bounds_report.summary["pass_rates"]
    cfg = default_config("bound-check")
    est_ok = len(cfg.seeds) >= 20 and all(rates[c]["rate"] >= STAT_PASS_RATE for c in ("quant_gemm_estimate", "lrqmm"))
    rsvd_ok = rates["rsvd_expected"]["rate"] == 1.0
    notes = [f"estimate {rates['quant_gemm_estimate']['rate']:.2f}", f"lrqmm {rates['lrqmm']['rate']:.2f}",
             f"rsvd mean {rates['rsvd_expected']['passed']}/{rates['rsvd_expected']['total']}"]

    # noise-dominated ratio at k=2000 against its constant limit
    limit_ok = True
    for d in ZERO_MEAN:
        for bits in (4, 8):
            s = ratio_study(parse_distribution(d), (2000,) * 3, bits, 10, TABLE_SEEDS, cfg)
            hit = within(s["median_ratio"], case1_ratio_limit(bits), 2)
            limit_ok &= hit
            notes.append(f"{d} N={bits} ratio {s['median_ratio']:.3g} vs limit {s['case1_limit']:.3g}")

    # mean-dominated ratio shrinks with k
    trend = [ratio_study(parse_distribution("Uniform(0,1)"), (k,) * 3, 4, 10, TABLE_SEEDS, cfg)["median_ratio"]
             for k in (200, 500, 1000, 2000)]
    trend_ok = all(b < a for a, b in zip(trend, trend[1:]))
    notes.append("Uniform ratio by k " + ", ".join(f"{x:.3g}" for x in trend))
    assert verdict(7, est_ok and rsvd_ok and limit_ok and trend_ok, "; ".join(notes))


def test_criterion_08_oracle_equivalence():
    out = oracle_verify(default_config("oracle-verify"))
    by_check = {}
    for t in out.trials:
        by_check.setdefault(t["config"]["check"], []).append(t)
    gemm = by_check["int_gemm"]
    ok = all(t["measured"]["mismatched_entries"] == 0 and t["config"]["size"] >= 200 for t in gemm)
    ok &= {t["config"]["bits"] for t in gemm} == {4, 8}
    ok &= all(t["measured"]["rel_diff"] <= 1e-12 and t["config"]["size"] == 20 for t in by_check["qt_assembly"])
    ok &= all(t["measured"]["rel_err"] <= 1e-9 and t["config"]["size"] == 50 for t in by_check["full_rank_identity"])
    ok &= all(all(t["pass"].values()) for t in by_check["small_svd"])
    worst = max(t["measured"]["rel_err"] for t in by_check["full_rank_identity"])
    assert verdict(8, ok, f"{len(out.trials)} checks, worst identity error {worst:.2e}")


def test_criterion_09_complexity():
    cfg = default_config("profile")
    assert [s[0] for s in cfg.sizes] == [256, 512, 1024, 2048]
    s = profile(cfg).summary
    ok = s["overhead_slope"] <= 2.6 and 2.7 <= s["int_gemm_slope"] <= 3.3 and s["overhead_fraction_decreasing"]
    detail = (f"non-GEMM slope {s['overhead_slope']:.2f}, int_gemm slope {s['int_gemm_slope']:.2f}, "
              f"overhead {s['overhead_fraction_first']:.2f} -> {s['overhead_fraction_last']:.2f}")
    assert verdict(9, ok, detail)


def test_criterion_10_determinism(tmp_path):
    runs = {
        "et.csv": ["error-table", "--size", "40", "--seeds", "1,2"],
        "rs.csv": ["rank-sweep", "--size", "40", "--ranks", "1,10,40", "--seeds", "1,2"],
        "ds.csv": ["dim-sweep", "--sizes", "40,80", "--seeds", "1,2"],
        "bc.json": ["bound-check", "--sizes", "30", "--seeds", "1,2"],
        "ov.json": ["oracle-verify", "--bits", "4"],
        "pf.csv": ["profile", "--sizes", "32,64", "--reps", "1", "--kernel", "float"],
    }
    codes = {}
    for name, argv in runs.items():
        path = str(tmp_path / name)
        assert cli.main(argv + ["--out", path]) == 0
        codes[name] = cli.main(["rerun", path])
    ok = all(c == 0 for c in codes.values())
    assert verdict(10, ok, ", ".join(f"{n}: {'bitwise' if c == 0 else 'MISMATCH'}" for n, c in codes.items()))


def test_error_table_header_is_schema():
    assert ERROR_TABLE_HEADER == (
        "distribution,scheme,bits,size_m,size_k,size_n,rank,seed_count,median_rel_err,min_rel_err,max_rel_err".split(",")
    )
