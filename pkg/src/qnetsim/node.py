"""Router and BSM nodes: hardware plus message dispatch."""

from __future__ import annotations

from dataclasses import dataclass

from .hardware import ClassicalChannel, QuantumMemory
from .kernel import SimulationError
from .protocols.generation import BSMStation
from .protocols.messages import Kind
from .resource import ResourceManager

_NETWORK_KINDS = frozenset({Kind.RESERVE, Kind.APPROVE, Kind.REJECT})


class _Messaging:
    def connect(self, other, delay_ps):
        """One-way classical channel from self to ``other``."""
        self.cchannels[other.name] = ClassicalChannel(self.timeline, self, other, delay_ps)

    def send(self, msg):
        try:
            channel = self.cchannels[msg.dst]
        except KeyError:
            raise SimulationError(
                f"{self.name}: no classical channel to {msg.dst} for {msg.kind}") from None
        channel.send(msg)

    def delay_to(self, other):
        return self.cchannels[other].delay


@dataclass
class Port:
    """Router side of a link: the half-fibre to the BSM station and its timing."""

    neighbor: str
    bsm: BSMStation
    qchannel: object
    bsm_delay: int


class RouterNode(_Messaging):
    kind = "router"

    def __init__(self, name, timeline, memory_count, memory_params, on_change=None):
        self.name = name
        self.timeline = timeline
        self.memories = [QuantumMemory(name, i, timeline, memory_params)
                         for i in range(memory_count)]
        self.rm = ResourceManager(self, timeline, self.memories, on_change)
        self.cchannels = {}
        self.ports = {}
        self.network = None
        self.app = None
        self.generation_stats = [0, 0]  # successes, failures
        self.generation_failures = {}  # (round, clicks) -> count
        self.swap_stats = [0, 0]

    def __repr__(self):
        return f"RouterNode({self.name})"

    @property
    def memory_count(self):
        return len(self.memories)

    def receive(self, msg):
        if msg.kind in _NETWORK_KINDS:
            self.network.receive(msg)
        else:
            self.rm.receive(msg)


class BSMNode(_Messaging):
    kind = "bsm"

    def __init__(self, name, timeline, endpoints, detectors, window_ps, frame_ps):
        if len(endpoints) != 2:
            raise ValueError(f"BSM node {name} needs exactly two endpoints")
        self.name = name
        self.timeline = timeline
        self.endpoints = tuple(endpoints)
        self.cchannels = {}
        self.station = BSMStation(self, timeline, detectors, window_ps, frame_ps)

    def __repr__(self):
        return f"BSMNode({self.name})"

    def receive_photon(self, photon):
        self.station.receive_photon(photon)

    def receive(self, msg):
        raise SimulationError(f"{self.name}: BSM nodes do not accept {msg.kind} messages")
