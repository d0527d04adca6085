"""``lrqmm`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 numerical-contract violation
(overflow precondition, failed oracle or bound check, rerun mismatch),
3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys

from ..errors import LrqmmError, OverflowPreconditionError
from .config import (
    COMMANDS,
    FAULTS,
    default_config,
    parse_int_list,
    parse_size,
    split_top_level,
)
from .experiments import run
from .io import FORMATS, config_of, diff_records, parse_record, read_record, render, write_record

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONTRACT = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrqmm", description="Quantized GEMM accuracy experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--dist", action="append", help="NAME(P1[,P2]); repeat or comma-separate")
        sp.add_argument("--size", action="append", help="M or M,K,N; repeatable")
        sp.add_argument("--sizes", help="comma list of square sizes, e.g. 200,500,1000")
        sp.add_argument("--bits", help="bit widths, e.g. 4 or 4,8")
        sp.add_argument("--rank", action="append", help="R or ratio:D; repeatable")
        sp.add_argument("--ranks", help="integer list or range, e.g. 1..200:20")
        sp.add_argument("--schemes", help="comma list from direct,qt3,qt4,lrqmm")
        sp.add_argument("--seeds", help="integer list or range, e.g. 1..5")
        sp.add_argument("--scale", type=float, help="multiply every size by F")
        sp.add_argument("--oversampling", type=int)
        sp.add_argument("--power-iters", type=int)
        sp.add_argument("--kernel", choices=("auto", "float", "int64"))
        sp.add_argument("--reps", type=int, help="timed repetitions (profile)")
        sp.add_argument("--fault", choices=FAULTS, help="inject a fault (oracle-verify)")
        sp.add_argument("--no-exact-svd", action="store_true", help="sketch even at full rank")
        sp.add_argument("--out", help="output file (never overwritten) or directory")
        sp.add_argument("--format", choices=FORMATS)
    rp = sub.add_parser("rerun", help="re-run a record from its embedded config and compare")
    rp.add_argument("path")
    rp.add_argument("--out", help="also write the fresh record here")
    return p


def config_from_args(ns: argparse.Namespace):
    cfg = default_config(ns.command)
    if ns.dist:
        cfg.distributions = [d for item in ns.dist for d in split_top_level(item)]
    sizes = []
    if ns.size:
        sizes += [parse_size(s) for s in ns.size]
    if ns.sizes:
        sizes += [(s, s, s) for s in parse_int_list(ns.sizes)]
    if sizes:
        cfg.sizes = sizes
    if ns.bits is not None:
        cfg.bits = parse_int_list(ns.bits)
    ranks = []
    if ns.rank:
        ranks += [r.strip() for r in ns.rank]
    if ns.ranks:
        ranks += [str(r) for r in parse_int_list(ns.ranks)]
    if ranks:
        cfg.ranks = ranks
    if ns.schemes is not None:
        cfg.schemes = split_top_level(ns.schemes)
    if ns.seeds is not None:
        cfg.seeds = parse_int_list(ns.seeds)
    for attr in ("scale", "oversampling", "power_iters", "kernel", "reps", "fault"):
        val = getattr(ns, attr)
        if val is not None:
            setattr(cfg, attr, val)
    if ns.no_exact_svd:
        cfg.exact_svd = False
    return cfg.validate()


def _rerun(ns) -> int:
    old = read_record(ns.path)
    cfg = config_of(old)
    outcome = run(cfg.validate())
    new = parse_record(render(outcome, old["format"]))
    diffs = diff_records(old, new)
    if ns.out:
        write_record(outcome, ns.out, old["format"])
    if diffs:
        for d in diffs:
            print(f"mismatch: {d}", file=sys.stderr)
        return EXIT_CONTRACT
    print(f"reproduced {ns.path}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command == "rerun":
            return _rerun(ns)
        cfg = config_from_args(ns)
        outcome = run(cfg)
        path = write_record(outcome, ns.out, ns.format)
        if path:
            print(f"wrote {path}", file=sys.stderr)
        if not outcome.ok:
            print("contract violation: " + json.dumps(outcome.summary, default=str)[:2000], file=sys.stderr)
            return EXIT_CONTRACT
        return EXIT_OK
    except UsageError as exc:
        print(f"lrqmm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OverflowPreconditionError as exc:
        print(f"lrqmm: overflow precondition: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"lrqmm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LrqmmError, ValueError, KeyError) as exc:
        print(f"lrqmm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
