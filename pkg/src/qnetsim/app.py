"""Random-request application: one sequential stream of reservations per router."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .network import Reservation
from .units import SECOND

log = logging.getLogger(__name__)


@dataclass
class RequestRanges:
    fidelity: tuple = (0.8, 1.0)
    duration_s: tuple = (10.0, 20.0)
    start_delay_s: tuple = (1.0, 2.0)
    min_memory: int = 10
    retry_delay_s: float = 1.0


@dataclass
class RequestRecord:
    app_node: str
    request_id: str
    outcome: str
    start: int
    end: int
    memory_size: int
    target_fidelity: float
    responder: str


class RandomRequestApp:
    def __init__(self, node, timeline, responders, capacity, ranges=None):
        if not responders:
            raise ValueError(f"app on {node.name}: no responders to choose from")
        self.node = node
        self.name = node.name
        self.timeline = timeline
        self.responders = sorted(responders)
        self.capacity = capacity
        self.ranges = ranges or RequestRanges()
        self.outstanding = None
        self.log = []
        self.pairs = {}  # reservation id -> delivered count
        self.deliveries = []  # (time, reservation id, fidelity)
        self.anomalies = 0
        self.sent_at = []
        # own stream, so the request sequence does not depend on the physics draws
        self.rng = random.Random(f"{timeline.seed}:app:{self.name}")

    @property
    def memory_bounds(self):
        hi = self.capacity // 2
        return min(self.ranges.min_memory, hi), hi

    def start(self, at=0):
        self.timeline.schedule(at, self._issue)

    def draw(self, responder=None, fidelity=None):
        """Draw a request; ``responder`` and ``fidelity`` are kept on retries."""
        rng = self.rng
        r = self.ranges
        now = self.timeline.now
        if responder is None:
            responder = self.responders[rng.randrange(len(self.responders))]
        if fidelity is None:
            fidelity = rng.uniform(*r.fidelity)
        lo, hi = self.memory_bounds
        memory_size = rng.randint(lo, hi)
        start = now + int(round(rng.uniform(*r.start_delay_s) * SECOND))
        end = start + int(round(rng.uniform(*r.duration_s) * SECOND))
        return Reservation(self.name, responder, fidelity, memory_size, start, end)

    def _issue(self, responder=None, fidelity=None):
        res = self.draw(responder, fidelity)
        self.outstanding = res
        self.sent_at.append(self.timeline.now)
        self.node.network.request(res)

    def on_approve(self, res):
        self.outstanding = None
        self.pairs.setdefault(res.id, 0)
        self._record(res, "approved")
        self.timeline.schedule(max(res.end, self.timeline.now), self._issue)

    def on_reject(self, res):
        self.outstanding = None
        self._record(res, "rejected")
        delay = int(round(self.ranges.retry_delay_s * SECOND))
        self.timeline.schedule(self.timeline.now + delay, self._issue, res.responder,
                               res.target_fidelity)

    def consume(self, res, record):
        now = self.timeline.now
        if record.fidelity < res.target_fidelity:
            raise AssertionError(
                f"{self.name}: delivered fidelity {record.fidelity} below target "
                f"{res.target_fidelity} for {res.id}")
        if not res.start <= now <= res.end:
            self.anomalies += 1
            log.warning("%s: delivery for %s outside its window", self.name, res.id)
            return
        self.pairs[res.id] = self.pairs.get(res.id, 0) + 1
        self.deliveries.append((now, res.id, record.fidelity))

    def _record(self, res, outcome):
        self.log.append(RequestRecord(self.name, res.id, outcome, res.start, res.end,
                                      res.memory_size, res.target_fidelity, res.responder))
