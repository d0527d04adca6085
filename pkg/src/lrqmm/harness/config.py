"""Experiment configuration: parsing CLI-style values, defaults, round-tripping."""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

from ..errors import ParameterError
from ..matrix import TABLE_DISTRIBUTIONS, parse_distribution
from ..qgemm import KERNELS, SchemeKind
from ..rsvd import DEFAULT_OVERSAMPLING, DEFAULT_POWER_ITERS

COMMANDS = ("error-table", "rank-sweep", "dim-sweep", "bound-check", "profile", "oracle-verify")
FAULTS = ("int_gemm", "qt_assembly", "small_svd", "identity")

Size = tuple[int, int, int]


@dataclass
class ExperimentConfig:
    command: str
    distributions: list[str] = field(default_factory=list)
    sizes: list[Size] = field(default_factory=list)
    bits: list[int] = field(default_factory=lambda: [4])
    ranks: list[str] = field(default_factory=lambda: ["10"])
    schemes: list[str] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    oversampling: int = DEFAULT_OVERSAMPLING
    power_iters: int = DEFAULT_POWER_ITERS
    kernel: str = "auto"
    exact_svd: bool = True
    reps: int = 3
    fault: str | None = None
    scale: float = 1.0

    def __post_init__(self):
        self.command = normalize_command(self.command)
        self.sizes = [tuple(int(x) for x in s) for s in self.sizes]
        self.bits = [int(b) for b in self.bits]
        self.seeds = [int(s) for s in self.seeds]
        self.ranks = [str(r) for r in self.ranks]

    def validate(self) -> "ExperimentConfig":
        if not self.seeds:
            raise ParameterError("at least one seed is required")
        if self.command in ("error-table",) and not self.schemes:
            raise ParameterError("scheme list is empty")
        for s in self.schemes:
            SchemeKind(s)
        for d in self.distributions:
            parse_distribution(d)
        for size in self.sizes:
            if len(size) != 3 or min(size) < 2:
                raise ParameterError(f"sizes must be M,K,N with every entry >= 2, got {size}")
        for r in self.ranks:
            rank_for(r, 1000)
        if self.kernel not in KERNELS:
            raise ParameterError(f"kernel must be one of {KERNELS}")
        if self.fault is not None and self.fault not in FAULTS:
            raise ParameterError(f"fault must be one of {FAULTS}")
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sizes"] = [list(s) for s in self.sizes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def normalize_command(cmd: str) -> str:
    c = cmd.replace("_", "-").lower()
    if c.startswith("cmd-"):
        c = c[4:]
    if c not in COMMANDS:
        raise ParameterError(f"unknown command {cmd!r}")
    return c


def rank_for(policy: str, size: int) -> int:
    """Resolve ``"R"`` or ``"ratio:D"`` for a matrix of (min) dimension ``size``.

    The ratio policy floors ``size / D`` and clamps to at least 1.
    """
    policy = str(policy).strip()
    if policy.startswith("ratio:"):
        try:
            d = int(policy[6:])
        except ValueError as exc:
            raise ParameterError(f"bad rank policy {policy!r}") from exc
        if d < 1:
            raise ParameterError("ratio divisor must be >= 1")
        return max(1, size // d)
    try:
        r = int(policy)
    except ValueError as exc:
        raise ParameterError(f"bad rank {policy!r}; use R or ratio:D") from exc
    if r < 1:
        raise ParameterError("rank must be >= 1")
    return r


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside parentheses: ``"Normal(0,1),Poisson(10)"``."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_int_list(text: str) -> list[int]:
    """``"1,2,5"`` or a range ``"1..10"`` / ``"1..200:20"`` (inclusive, with step)."""
    out: list[int] = []
    for part in split_top_level(text):
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)(?::(\d+))?", part)
        if m:
            lo, hi, step = int(m[1]), int(m[2]), int(m[3] or 1)
            if step < 1:
                raise ParameterError("range step must be >= 1")
            out.extend(range(lo, hi + 1, step))
        else:
            try:
                out.append(int(part))
            except ValueError as exc:
                raise ParameterError(f"expected an integer list, got {text!r}") from exc
    return out


def parse_size(text: str) -> Size:
    vals = parse_int_list(text)
    if len(vals) == 1:
        return (vals[0],) * 3
    if len(vals) == 3:
        return tuple(vals)
    raise ParameterError(f"size must be M or M,K,N, got {text!r}")


def scale_size(size: Size, scale: float) -> Size:
    return tuple(max(2, int(round(x * scale))) for x in size)


def default_config(command: str) -> ExperimentConfig:
    """Desk-scale defaults mirroring the published experiments."""
    command = normalize_command(command)
    if command == "error-table":
        return ExperimentConfig(
            command,
            distributions=list(TABLE_DISTRIBUTIONS),
            sizes=[(2000, 2000, 2000)],
            schemes=[k.value for k in (SchemeKind.DIRECT, SchemeKind.QT_PARTIAL, SchemeKind.QT_FULL, SchemeKind.LRQMM)],
        )
    if command == "rank-sweep":
        return ExperimentConfig(
            command,
            distributions=["Uniform(0,1)"],
            sizes=[(200, 200, 200)],
            ranks=[str(r) for r in [*range(1, 200, 20), 200]],
            seeds=list(range(1, 11)),
        )
    if command == "dim-sweep":
        return ExperimentConfig(
            command,
            distributions=["Uniform(0,1)"],
            sizes=[(s, s, s) for s in (200, 500, 1000, 2000)],
            ranks=["10", "ratio:100"],
            seeds=list(range(1, 11)),
        )
    if command == "bound-check":
        return ExperimentConfig(
            command,
            distributions=list(TABLE_DISTRIBUTIONS),
            sizes=[(s, s, s) for s in (50, 200, 500)],
            bits=[4, 8],
            seeds=list(range(1, 21)),
        )
    if command == "profile":
        return ExperimentConfig(
            command,
            distributions=["Uniform(0,1)"],
            sizes=[(s, s, s) for s in (256, 512, 1024, 2048)],
            seeds=[1],
            kernel="int64",
        )
    return ExperimentConfig(command, seeds=[1], bits=[4, 8])
