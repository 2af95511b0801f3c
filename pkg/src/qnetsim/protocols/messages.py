"""Classical wire records exchanged between nodes.

Every record names its source and destination node. Protocol records also
carry the receiving protocol instance id so the destination resource manager
can route them; a record whose instance no longer exists is stale and dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class Kind:
    # resource-manager pairing
    PAIR_REQUEST = "PAIR_REQUEST"
    PAIR_ACCEPT = "PAIR_ACCEPT"
    PAIR_DECLINE = "PAIR_DECLINE"
    TERMINATE = "TERMINATE"
    # entanglement protocols
    NEGOTIATE = "NEGOTIATE"
    NEGOTIATE_ACK = "NEGOTIATE_ACK"
    MR = "MR"
    PURIFICATION_RESULT = "PURIFICATION_RESULT"
    SWAP_RESULT = "SWAP_RESULT"
    # reservation
    RESERVE = "RESERVE"
    APPROVE = "APPROVE"
    REJECT = "REJECT"


@dataclass(slots=True)
class PairRequest:
    src: str
    dst: str
    protocol: str  # "generation" | "purification" | "swapping"
    reservation: str
    instance: int  # requester instance id
    info: dict = field(default_factory=dict)
    kind: str = Kind.PAIR_REQUEST


@dataclass(slots=True)
class PairAccept:
    src: str
    dst: str
    instance: int  # requester instance id (receiver side)
    remote_instance: int
    info: dict = field(default_factory=dict)
    kind: str = Kind.PAIR_ACCEPT


@dataclass(slots=True)
class PairDecline:
    src: str
    dst: str
    instance: int
    reason: str = ""
    kind: str = Kind.PAIR_DECLINE


@dataclass(slots=True)
class Terminate:
    src: str
    dst: str
    instance: int
    kind: str = Kind.TERMINATE


@dataclass(slots=True)
class Negotiate:
    src: str
    dst: str
    instance: int
    next_excite_time: int
    memory_period: int
    bsm_delay: int
    fidelity: float
    coherence: int
    kind: str = Kind.NEGOTIATE


@dataclass(slots=True)
class NegotiateAck:
    src: str
    dst: str
    instance: int
    emit_times: tuple  # (round-1 emission, round-2 emission)
    fidelity: float
    coherence: int
    kind: str = Kind.NEGOTIATE_ACK


@dataclass(slots=True)
class MeasurementResult:
    src: str
    dst: str
    instance: int
    round: int
    clicks: int
    detector: int  # index of the single clicking detector, -1 otherwise
    herald: bool  # ground truth: the click came from a real photon
    kind: str = Kind.MR


@dataclass(slots=True)
class PurificationResult:
    src: str
    dst: str
    instance: int
    kind: str = Kind.PURIFICATION_RESULT


@dataclass(slots=True)
class SwapResult:
    src: str
    dst: str
    instance: int
    success: bool
    partner: tuple | None
    fidelity: float
    expiration: int
    kind: str = Kind.SWAP_RESULT


@dataclass(slots=True)
class ReservationMessage:
    src: str
    dst: str
    kind: str  # RESERVE | APPROVE | REJECT
    reservation: object
    path: list
