"""Self-describing CSV/JSON records.

CSV files open with a single comment line ``# lrqmm {json}`` carrying the
full config, so a record can be re-run without any outside context. Floats
are written with ``repr`` and therefore round-trip bitwise.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import os
import sys

from .config import ExperimentConfig
from .experiments import PROFILE_TIMING_COLUMNS, Outcome

MAGIC = "# lrqmm "
SUMMARY_MAGIC = "# summary "
FORMATS = ("csv", "json")
TIMING_COLUMNS = frozenset(PROFILE_TIMING_COLUMNS)
NATIVE_FORMAT = {
    "error-table": "csv",
    "rank-sweep": "csv",
    "dim-sweep": "csv",
    "profile": "csv",
    "bound-check": "json",
    "oracle-verify": "json",
}


def _meta(outcome: Outcome) -> dict:
    return {"command": outcome.command, "config": outcome.config.to_dict(), "statistic": "median"}


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in d.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, name + "."))
        elif isinstance(val, list):
            out[name] = json.dumps(val)
        else:
            out[name] = val
    return out


def _tabular(outcome: Outcome) -> tuple[list[str], list[dict]]:
    if outcome.trials is None:
        return outcome.header, outcome.rows
    rows = [_flatten({k: v for k, v in t.items() if k != "timings_ns"}) for t in outcome.trials]
    header: list[str] = []
    for row in rows:
        header += [k for k in row if k not in header]
    return header, rows


def render_csv(outcome: Outcome) -> str:
    header, rows = _tabular(outcome)
    buf = io.StringIO()
    buf.write(MAGIC + json.dumps(_meta(outcome), sort_keys=True) + "\n")
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", restval="")
    writer.writeheader()
    writer.writerows(rows)
    if outcome.summary:
        buf.write(SUMMARY_MAGIC + json.dumps(outcome.summary, sort_keys=True) + "\n")
    return buf.getvalue()


def render_json(outcome: Outcome) -> str:
    trials = outcome.trials
    if trials is None:
        trials = [
            {"config": {k: v for k, v in r.items() if not k.endswith("_err") and not k.endswith("_ns")},
             "measured": {k: v for k, v in r.items() if k.endswith("_err")},
             "bounds": {},
             "timings_ns": {k: v for k, v in r.items() if k.endswith("_ns")},
             "pass": True}
            for r in outcome.rows
        ]
    doc = {**_meta(outcome), "summary": outcome.summary, "ok": outcome.ok, "trials": trials}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def render(outcome: Outcome, fmt: str | None = None) -> str:
    fmt = fmt or NATIVE_FORMAT[outcome.command]
    return render_csv(outcome) if fmt == "csv" else render_json(outcome)


def resolve_path(out: str, command: str, fmt: str) -> str:
    """An existing directory gets a timestamped file name inside it."""
    if os.path.isdir(out):
        stamp = _dt.datetime.now().strftime("%Y%m%dT%H%M%S%f")
        return os.path.join(out, f"{command}-{stamp}.{fmt}")
    return out


def write_record(outcome: Outcome, out: str | None, fmt: str | None = None) -> str | None:
    """Write to ``out`` (never overwriting) or to stdout when ``out`` is None."""
    fmt = fmt or NATIVE_FORMAT[outcome.command]
    text = render(outcome, fmt)
    if out is None:
        sys.stdout.write(text)
        return None
    path = resolve_path(out, outcome.command, fmt)
    with open(path, "x", newline="") as fh:
        fh.write(text)
    return path


def read_record(path: str) -> dict:
    """Parse a record written by :func:`write_record`.

    Returns ``{"command", "config", "format", "rows" | "trials", "summary"}``.
    """
    with open(path, newline="") as fh:
        return parse_record(fh.read(), path)


def parse_record(text: str, source: str = "<string>") -> dict:
    if text.startswith(MAGIC):
        first, _, rest = text.partition("\n")
        meta = json.loads(first[len(MAGIC):])
        body = [ln for ln in rest.splitlines() if not ln.startswith("#")]
        summary = {}
        for ln in rest.splitlines():
            if ln.startswith(SUMMARY_MAGIC):
                summary = json.loads(ln[len(SUMMARY_MAGIC):])
        rows = list(csv.DictReader(body))
        return {**meta, "format": "csv", "rows": rows, "summary": summary}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{source} is not an lrqmm record") from exc
    if not isinstance(doc, dict) or "config" not in doc:
        raise ValueError(f"{source} is not an lrqmm record")
    return {**doc, "format": "json"}


def config_of(record: dict) -> ExperimentConfig:
    return ExperimentConfig.from_dict(record["config"])


def _strip_timings(record: dict) -> list:
    if record["format"] == "csv":
        return [{k: v for k, v in r.items() if k not in TIMING_COLUMNS} for r in record["rows"]]
    return [{k: v for k, v in t.items() if k != "timings_ns"} for t in record["trials"]]


def diff_records(old: dict, new: dict) -> list[str]:
    """Human-readable differences between two records, timings excluded."""
    a, b = _strip_timings(old), _strip_timings(new)
    if len(a) != len(b):
        return [f"record count differs: {len(a)} vs {len(b)}"]
    out = []
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            keys = sorted(k for k in set(x) | set(y) if x.get(k) != y.get(k))
            out.append(f"entry {i}: {', '.join(keys)} differ")
    return out
