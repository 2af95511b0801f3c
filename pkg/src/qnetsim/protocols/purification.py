"""BBPSSW purification of two equal-fidelity pairs shared by the same two nodes."""

from __future__ import annotations

from ..resource import ENTANGLED, RAW
from .base import ProtocolInstance
from .messages import Kind, PurificationResult

START, WAIT_RESULT, DONE = "START", "WAIT_RESULT", "DONE"


def purification_success_probability(f: float) -> float:
    if not 0.0 < f <= 1.0:
        raise ValueError(f"fidelity {f} outside (0, 1]")
    q = (1.0 - f) / 3.0
    return f * f + 2.0 * f * q + 5.0 * q * q


def purification_fidelity(f: float) -> float:
    """Fidelity of the kept pair after a successful round."""
    q = (1.0 - f) / 3.0
    return (f * f + q * q) / purification_success_probability(f)


class PurificationProtocol(ProtocolInstance):
    """One side of a purification round.

    The initiator draws the outcome once and ships it with the pairing
    request, so both sides agree. Neither side touches its records until the
    other side's result message has arrived.
    """

    protocol = "purification"

    def __init__(self, rm, reservation, kept, measured, remote_node, success, initiator):
        f = kept.memory.record.fidelity
        if not f > 0.5 or measured.memory.record.fidelity != f:
            raise ValueError(f"purification needs two pairs with equal fidelity > 0.5, got "
                             f"{f} and {measured.memory.record.fidelity}")
        super().__init__(rm, reservation, [kept, measured])
        self.kept = kept
        self.measured = measured
        self.input_fidelity = f
        self.remote_node = remote_node
        self.success = success
        self.initiator = initiator
        self.phase = START

    def request_info(self):
        return {
            "kept": self.kept.memory.record.partner[1],
            "measured": self.measured.memory.record.partner[1],
            "kept_partner": self.kept.index,
            "measured_partner": self.measured.index,
            "fidelity": self.input_fidelity,
            "success": self.success,
        }

    def start(self):
        if self.initiator:
            self.rm.pair_remote(self, "purification", self.remote_node, self.request_info())
        else:
            self._send_result()

    def _send_result(self):
        self.phase = WAIT_RESULT
        self.rm.send(PurificationResult(self.rm.name, self.remote_node, self.remote_instance))

    def receive(self, msg):
        kind = msg.kind
        if kind == Kind.PAIR_ACCEPT:
            self.remote_instance = msg.remote_instance
            self._send_result()
        elif kind == Kind.PURIFICATION_RESULT:
            self._apply()
        elif kind == Kind.PAIR_DECLINE:
            self.terminate(notify=False, backoff=self.decline_backoff(self.remote_node))

    def _apply(self):
        self.phase = DONE
        kept = self.kept
        if not self.success:
            self.finish([(kept, RAW), (self.measured, RAW)])
            return
        rec = kept.memory.record
        expiration = min(rec.expiration, self.measured.memory.record.expiration)
        kept.memory.entangle(rec.partner, purification_fidelity(self.input_fidelity), expiration)
        self.finish([(kept, ENTANGLED), (self.measured, RAW)])

    def memory_expired(self, info):
        # the sibling record may still be valid; hand it back entangled
        self.terminate(notify=True)


def respond(rm, msg):
    """Responder-side validation of a purification pairing request."""
    info = msg.info
    infos = rm.infos
    try:
        kept = infos[info["kept"]]
        measured = infos[info["measured"]]
    except (IndexError, KeyError):
        return None
    for mine, theirs in ((kept, info["kept_partner"]), (measured, info["measured_partner"])):
        rec = mine.memory.record
        if (mine.state is not ENTANGLED or mine.owner is not None or rec is None
                or mine.reservation != msg.reservation or rec.partner != (msg.src, theirs)
                or rec.fidelity != info["fidelity"]):
            return None
    inst = PurificationProtocol(rm, msg.reservation, kept, measured, msg.src, info["success"],
                                initiator=False)
    inst.remote_instance = msg.instance
    return inst
