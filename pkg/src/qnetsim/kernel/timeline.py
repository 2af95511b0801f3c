from __future__ import annotations

import math
import random
import time as _wallclock
from dataclasses import dataclass

from . import EventQueue, _pyqueue
from ..units import to_seconds


@dataclass(frozen=True)
class RunSummary:
    executed: int
    scheduled: int
    cancelled: int
    pending: int
    simulated_seconds: float
    wall_seconds: float
    implementation: str

    def __str__(self) -> str:
        rate = self.executed / self.wall_seconds if self.wall_seconds > 0 else float("inf")
        return (
            f"executed {self.executed} events in {self.wall_seconds:.3f} s wall "
            f"({rate:,.0f} events/s, {self.implementation} kernel); "
            f"simulated {self.simulated_seconds:.6f} s"
        )


class _TimelineMixin:
    """Seeded randomness and run bookkeeping shared by both queue backends.

    All stochastic models draw from ``self.rng`` in event-execution order, so
    one seed reproduces an entire run.
    """

    def _init_timeline(self, seed: int) -> None:
        self.seed = seed
        self.rng = random.Random(seed)
        self.entities = {}

    def run(self, stop: int | None = None) -> RunSummary:
        start = _wallclock.perf_counter()
        self._run(stop)
        wall = _wallclock.perf_counter() - start
        return RunSummary(
            executed=self.executed_count,
            scheduled=self.scheduled_count,
            cancelled=self.cancelled_count,
            pending=self.pending_count,
            simulated_seconds=to_seconds(self.now),
            wall_seconds=wall,
            implementation=self.implementation,
        )

    # -- distributions -------------------------------------------------

    def uniform(self, a: float, b: float) -> float:
        if not a <= b:
            raise ValueError(f"uniform({a}, {b}): empty interval")
        return a + (b - a) * self.rng.random()

    def bernoulli(self, p: float) -> bool:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"bernoulli({p}): probability outside [0, 1]")
        return self.rng.random() < p

    def exponential(self, rate: float) -> float:
        if not rate > 0:
            raise ValueError(f"exponential({rate}): rate must be positive")
        return -math.log(1.0 - self.rng.random()) / rate

    def randint(self, a: int, b: int) -> int:
        """Integer uniform on the closed interval [a, b]."""
        if a > b:
            raise ValueError(f"randint({a}, {b}): empty interval")
        return a + int(self.rng.random() * (b - a + 1))


class Timeline(_TimelineMixin, EventQueue):
    """Simulation timeline backed by the preferred event queue."""

    def __init__(self, seed: int = 0):
        super().__init__()
        self._init_timeline(seed)


class PurePythonTimeline(_TimelineMixin, _pyqueue.EventQueue):
    def __init__(self, seed: int = 0):
        super().__init__()
        self._init_timeline(seed)


def make_timeline(seed: int = 0, implementation: str | None = None):
    """Build a timeline, optionally forcing ``"python"`` or ``"cython"``."""
    if implementation is None or implementation == EventQueue.implementation:
        return Timeline(seed)
    if implementation == "python":
        return PurePythonTimeline(seed)
    raise ValueError(f"kernel implementation {implementation!r} is not available")
