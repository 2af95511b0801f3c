"""Static routing, hop-by-hop reservation and rule generation."""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field

from .protocols.generation import GenerationProtocol
from .protocols.messages import Kind, ReservationMessage
from .protocols.purification import PurificationProtocol, purification_success_probability
from .protocols.swapping import SwapIntermediate
from .resource import ENTANGLED, RAW, Rule

log = logging.getLogger(__name__)

GENERATION_PRIORITY = 10
TERMINAL_PRIORITY = 20
SWAP_PRIORITY = 30
PURIFICATION_PRIORITY = 40

_TIE = 1e-9


# ---------------------------------------------------------------------------
# routing


def _dijkstra(adj, source):
    dist = {source: 0.0}
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u].items():
            nd = d + w
            if nd < dist.get(v, float("inf")):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def build_forwarding_tables(nodes, links):
    """Next-hop tables from shortest fibre distance.

    ``links`` maps (u, v) -> length_km (undirected). Among equally short
    routes the lexicographically smallest next hop wins, which keeps the
    hop-by-hop paths consistent with each other.
    """
    adj = {n: {} for n in nodes}
    for (u, v), length in links.items():
        if length < 0:
            raise ValueError(f"link {u}-{v} has negative length")
        for a, b in ((u, v), (v, u)):
            if b not in adj[a] or length < adj[a][b]:
                adj[a][b] = length
    dist_to = {dst: _dijkstra(adj, dst) for dst in nodes}
    tables = {}
    for src in nodes:
        table = {}
        for dst in nodes:
            if dst == src or src not in dist_to[dst]:
                continue
            best = dist_to[dst][src]
            hops = sorted(v for v, w in adj[src].items()
                          if v in dist_to[dst] and abs(w + dist_to[dst][v] - best) <= _TIE)
            table[dst] = hops[0]
        tables[src] = table
    return tables


def route(tables, src, dst):
    """Follow next hops from ``src``; None if unreachable."""
    path = [src]
    while path[-1] != dst:
        nxt = tables[path[-1]].get(dst)
        if nxt is None or nxt in path:
            return None
        path.append(nxt)
    return path


def swap_ordering(path):
    """node -> (left end, right end) of the segment it joins, by binary split."""
    out = {}

    def split(lo, hi):
        if hi - lo < 2:
            return
        mid = (lo + hi) // 2
        out[path[mid]] = (path[lo], path[hi])
        split(lo, mid)
        split(mid, hi)

    split(0, len(path) - 1)
    return out


def swap_levels(path):
    """Swap designations grouped by nesting level, outermost first."""
    levels = []

    def split(lo, hi, depth):
        if hi - lo < 2:
            return
        mid = (lo + hi) // 2
        while len(levels) <= depth:
            levels.append([])
        levels[depth].append(path[mid])
        split(lo, mid, depth + 1)
        split(mid, hi, depth + 1)

    split(0, len(path) - 1, 0)
    return levels


# ---------------------------------------------------------------------------
# reservations


@dataclass
class Reservation:
    initiator: str
    responder: str
    target_fidelity: float
    memory_size: int
    start: int
    end: int
    id: str = ""
    path: list = field(default_factory=list)

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"reservation window [{self.start}, {self.end}] is empty")
        if not 0.0 < self.target_fidelity <= 1.0:
            raise ValueError(f"target fidelity {self.target_fidelity} outside (0, 1]")
        if self.memory_size < 1:
            raise ValueError("memory_size must be positive")


class ReservationLedger:
    """Memory commitments of one node over closed time intervals."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = {}  # reservation id -> (start, end, count)

    def committed_at(self, t):
        return sum(c for s, e, c in self.entries.values() if s <= t <= e)

    def peak(self, start, end):
        points = [start] + [s for s, e, _ in self.entries.values() if start <= s <= end]
        return max(self.committed_at(p) for p in points)

    def available(self, start, end, need):
        return self.peak(start, end) + need <= self.capacity

    def commit(self, rid, start, end, count):
        if rid in self.entries:
            raise ValueError(f"reservation {rid} already committed")
        if not self.available(start, end, count):
            return False
        self.entries[rid] = (start, end, count)
        return True

    def release(self, rid):
        return self.entries.pop(rid, None) is not None

    def total(self, rid):
        entry = self.entries.get(rid)
        return entry[2] if entry else 0


class NetworkManager:
    """Reservation protocol endpoint on one router."""

    def __init__(self, node, timeline, ledger, tables, protocol_params):
        self.node = node
        self.name = node.name
        self.timeline = timeline
        self.ledger = ledger
        self.tables = tables
        self.params = protocol_params
        self.approved = {}
        self.app = None
        self.trace = []
        self._ids = itertools.count(1)

    def next_hop(self, dst):
        return self.tables.get(self.name, {}).get(dst)

    def request(self, reservation):
        """Start a reservation at the initiator; the outcome reaches ``self.app``."""
        if not reservation.id:
            reservation.id = f"{self.name}:{next(self._ids)}"
        nxt = self.next_hop(reservation.responder)
        if nxt is None or not self.ledger.commit(reservation.id, reservation.start,
                                                 reservation.end, reservation.memory_size):
            self._deliver_outcome(reservation, approved=False)
            return reservation
        self.node.send(ReservationMessage(self.name, nxt, Kind.RESERVE, reservation, [self.name]))
        return reservation

    def receive(self, msg):
        kind = msg.kind
        if kind == Kind.RESERVE:
            self._on_reserve(msg)
        elif kind == Kind.APPROVE:
            self._on_approve(msg)
        elif kind == Kind.REJECT:
            self._on_reject(msg)

    def _on_reserve(self, msg):
        res = msg.reservation
        path = msg.path + [self.name]
        is_responder = self.name == res.responder
        need = res.memory_size if is_responder else 2 * res.memory_size
        nxt = None if is_responder else self.next_hop(res.responder)
        ok = (is_responder or nxt is not None) and self.ledger.commit(res.id, res.start, res.end,
                                                                       need)
        if not ok:
            # nodes before us hold tentative commitments; unwind them
            self.node.send(ReservationMessage(self.name, path[-2], Kind.REJECT, res, path[:-1]))
            return
        if is_responder:
            self._install(res, path)
            self.node.send(ReservationMessage(self.name, path[-2], Kind.APPROVE, res, path))
        else:
            self.node.send(ReservationMessage(self.name, nxt, Kind.RESERVE, res, path))

    def _on_approve(self, msg):
        res = msg.reservation
        path = msg.path
        self._install(res, path)
        i = path.index(self.name)
        if i == 0:
            self._deliver_outcome(res, approved=True)
        else:
            self.node.send(ReservationMessage(self.name, path[i - 1], Kind.APPROVE, res, path))

    def _on_reject(self, msg):
        res = msg.reservation
        path = msg.path
        self.ledger.release(res.id)
        i = path.index(self.name)
        if i == 0:
            self._deliver_outcome(res, approved=False)
        else:
            self.node.send(ReservationMessage(self.name, path[i - 1], Kind.REJECT, res, path[:i]))

    def _deliver_outcome(self, res, approved):
        if not approved:
            self.ledger.release(res.id)
        if self.app is not None:
            (self.app.on_approve if approved else self.app.on_reject)(res)

    # -- rule installation ---------------------------------------------

    def _install(self, res, path):
        res.path = list(path)
        self.approved[res.id] = res
        rules, assignments = generate_rules(self.node, res, path, self.params)
        rm = self.node.rm
        for rule in rules:
            rm.rule_manager.install(rule)
        tl = self.timeline
        tl.schedule(max(tl.now, res.start), self._activate, res, assignments)
        tl.schedule(max(tl.now, res.end), self._deactivate, res)

    def _activate(self, res, assignments):
        self.trace.append((self.timeline.now, "activate", res.id))
        self.node.rm.activate(res.id, assignments)

    def _deactivate(self, res):
        self.trace.append((self.timeline.now, "deactivate", res.id))
        rm = self.node.rm
        rm.deactivate(res.id)
        rm.rule_manager.uninstall_expired(self.timeline.now)
        self.ledger.release(res.id)
        self.approved.pop(res.id, None)


# ---------------------------------------------------------------------------
# rules


def generate_rules(node, res, path, params):
    """Rules for ``node`` under reservation ``res``; returns (rules, memory assignments).

    Every router gets a generation rule and a purification rule; the two ends
    also get a terminal delivery rule, intermediates a swapping rule.
    """
    me = node.name
    index = {n: k for k, n in enumerate(path)}
    i = index[me]
    m = res.memory_size
    target = res.target_fidelity
    rid = res.id
    neighbours = [path[k] for k in (i - 1, i + 1) if 0 <= k < len(path)]
    assignments = [(n, m) for n in neighbours]
    window = dict(reservation=rid, start=res.start, end=res.end)

    def gen_condition(info, rm):
        if info.state is RAW and info.remote is not None:
            return [info]
        return None

    def gen_action(rm, infos):
        info = infos[0]
        remote = info.remote
        GenerationProtocol(rm, rid, info, node.ports[remote], index[me] < index[remote]).start()

    rules = [Rule(GENERATION_PRIORITY, gen_condition, gen_action, name="generation", **window)]

    def pur_condition(info, rm):
        if info.state is not ENTANGLED:
            return None
        rec = info.memory.record
        remote = rec.partner[0]
        if index.get(remote, -1) <= i or not 0.5 < rec.fidelity < target:
            return None
        groups = {}
        for other in rm.memory_manager.entangled_with(rid, remote):
            f = other.memory.record.fidelity
            if 0.5 < f < target:
                groups.setdefault(f, []).append(other)
        for f in sorted(groups):
            members = groups[f]
            if len(members) >= 2:
                members.sort(key=lambda x: x.index)
                return members[:2]
        return None

    def pur_action(rm, infos):
        kept, measured = infos
        rec = kept.memory.record
        success = rm.timeline.bernoulli(purification_success_probability(rec.fidelity))
        PurificationProtocol(rm, rid, kept, measured, rec.partner[0], success,
                             initiator=True).start()

    rules.append(Rule(PURIFICATION_PRIORITY, pur_condition, pur_action, name="purification",
                      **window))

    ends = (path[0], path[-1])
    if me in ends:
        other_end = ends[1] if me == ends[0] else ends[0]

        def term_condition(info, rm):
            if info.state is not ENTANGLED:
                return None
            rec = info.memory.record
            if rec.partner[0] == other_end and rec.fidelity >= target:
                return [info]
            return None

        def term_action(rm, infos):
            info = infos[0]
            rec = info.memory.record
            if me == res.initiator and node.app is not None:
                node.app.consume(res, rec)
            rm.consume(info)

        rules.append(Rule(TERMINAL_PRIORITY, term_condition, term_action, name="terminal",
                          **window))
    else:
        lo, hi = swap_ordering(path)[me]

        def swap_condition(info, rm):
            if info.state is not ENTANGLED:
                return None
            rec = info.memory.record
            if rec.fidelity < target:
                return None
            partner = rec.partner[0]
            if partner == lo:
                want = hi
            elif partner == hi:
                want = lo
            else:
                return None
            for other in rm.memory_manager.entangled_with(rid, want):
                if other.memory.record.fidelity >= target:
                    return [info, other] if partner == lo else [other, info]
            return None

        def swap_action(rm, infos):
            SwapIntermediate(rm, rid, infos[0], infos[1], params.p_swap,
                             params.swap_degradation).start()

        rules.append(Rule(SWAP_PRIORITY, swap_condition, swap_action, name="swapping",
                          **window))
    return rules, assignments
