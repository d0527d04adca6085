"""Per-phase wall-clock accounting (monotonic, nanoseconds)."""
from __future__ import annotations

import time
from contextlib import contextmanager

PHASES = ("quantize", "int_gemm", "rsvd", "residual_terms", "package")


class PhaseTimer:
    def __init__(self):
        self.ns: dict[str, int] = {}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter_ns()
        try:
            yield
        finally:
            self.ns[name] = self.ns.get(name, 0) + time.perf_counter_ns() - start

    def total(self) -> int:
        return sum(self.ns.values())
