"""Entanglement swapping at an intermediate router."""

from __future__ import annotations

from ..resource import ENTANGLED, RAW
from .base import ProtocolInstance
from .messages import Kind, SwapResult, Terminate

INTERMEDIATE, END = "INTERMEDIATE", "END"


def swap_fidelity(f1: float, f2: float, degradation: float) -> float:
    return f1 * f2 * degradation


class SwapIntermediate(ProtocolInstance):
    """Holds one memory entangled towards each segment end.

    Both ends are asked to lock their memories first; once both accept, the
    outcome is drawn, both ends are told, and the local memories are freed.
    """

    protocol = "swapping"
    role = INTERMEDIATE

    def __init__(self, rm, reservation, left, right, p_swap, degradation):
        super().__init__(rm, reservation, [left, right])
        self.left = left
        self.right = right
        self.p_swap = p_swap
        self.degradation = degradation
        self.ends = [left.memory.record.partner, right.memory.record.partner]
        self.accepted = {}
        self.phase = "WAIT_ACCEPT"
        self.success = None

    def start(self):
        for info, (node, idx) in zip(self.infos, self.ends):
            self.rm.pair_remote(self, "swapping", node,
                                {"memory": idx, "partner": info.index})

    def receive(self, msg):
        kind = msg.kind
        if kind == Kind.PAIR_ACCEPT:
            self.accepted[msg.src] = msg.remote_instance
            if len(self.accepted) == 2:
                self._swap()
        elif kind == Kind.PAIR_DECLINE:
            self.terminate(notify=True, backoff=self.decline_backoff(msg.src))

    def notify_terminate(self):
        for node, inst in self.accepted.items():
            self.rm.send(Terminate(self.rm.name, node, inst))

    def _swap(self):
        left, right = self.left.memory.record, self.right.memory.record
        self.success = self.timeline.bernoulli(self.p_swap)
        fidelity = swap_fidelity(left.fidelity, right.fidelity, self.degradation)
        expiration = min(left.expiration, right.expiration)
        (a_node, a_mem), (c_node, c_mem) = self.ends
        send = self.rm.send
        name = self.rm.name
        send(SwapResult(name, a_node, self.accepted[a_node], self.success, (c_node, c_mem),
                        fidelity, expiration))
        send(SwapResult(name, c_node, self.accepted[c_node], self.success, (a_node, a_mem),
                        fidelity, expiration))
        self.phase = "DONE"
        self.rm.node.swap_stats[0 if self.success else 1] += 1
        self.finish([(self.left, RAW), (self.right, RAW)])


class SwapEnd(ProtocolInstance):
    protocol = "swapping"
    role = END

    def __init__(self, rm, reservation, info, intermediate, remote_instance):
        super().__init__(rm, reservation, [info])
        self.info = info
        self.remote_node = intermediate
        self.remote_instance = remote_instance
        self.phase = "WAIT_RESULT"

    def receive(self, msg):
        if msg.kind != Kind.SWAP_RESULT:
            return
        mem = self.info.memory
        if not msg.success or msg.expiration <= self.timeline.now or mem.record is None:
            self.finish([(self.info, RAW)])
            return
        mem.entangle(msg.partner, msg.fidelity, msg.expiration)
        self.finish([(self.info, ENTANGLED)])


def respond(rm, msg):
    info = msg.info
    try:
        mine = rm.infos[info["memory"]]
    except (IndexError, KeyError):
        return None
    rec = mine.memory.record
    if (mine.state is not ENTANGLED or mine.owner is not None or rec is None
            or mine.reservation != msg.reservation or rec.partner != (msg.src, info["partner"])):
        return None
    return SwapEnd(rm, msg.reservation, mine, msg.src, msg.instance)
