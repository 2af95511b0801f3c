"""Hardware models: channels, detectors, single-atom memories.

Photon tokens carry ground-truth metadata (which memory emitted, in which
branch) that protocol code never inspects directly; only detector clicks are
visible to protocols. The BSM station uses the metadata to tell a real herald
from a dark count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .units import SECOND


class HardwareError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# closed forms


def entanglement_fidelity(cooperativity: float, gamma: float, gamma_star: float,
                          delta_omega: float = 0.0) -> float:
    """Fidelity of a heralded pair from two single-atom memories in cavities.

    ``cooperativity`` is the atom-cavity cooperativity C, ``gamma`` the bare
    optical decay rate, ``gamma_star`` the pure dephasing rate and
    ``delta_omega`` the optical frequency mismatch between the two atoms.
    """
    if cooperativity <= 0 or gamma <= 0 or gamma_star < 0:
        raise ValueError("need C > 0, gamma > 0, gamma_star >= 0")
    c1 = (cooperativity + 1.0) * gamma
    return 0.5 * (1.0 + c1 * c1 / ((c1 + 2.0 * gamma_star) ** 2 + delta_omega ** 2))


def memory_efficiency(collection_efficiency: float, cooperativity: float) -> float:
    """Photon emission efficiency e = eta_c * C / (C + 1)."""
    if not 0.0 <= collection_efficiency <= 1.0 or cooperativity <= 0:
        raise ValueError("need 0 <= eta_c <= 1 and C > 0")
    return collection_efficiency * cooperativity / (cooperativity + 1.0)


def transmittance(length_km: float, attenuation_db_per_km: float) -> float:
    return 10.0 ** (-length_km * attenuation_db_per_km / 10.0)


def period_ps(rate_hz: float) -> int:
    return int(round(SECOND / rate_hz))


# ---------------------------------------------------------------------------
# tokens and records


class Photon:
    """A photon emitted by a memory. ``branch_down`` is ground truth."""

    __slots__ = ("source", "emit_time", "branch_down")

    def __init__(self, source, emit_time, branch_down=True):
        self.source = source
        self.emit_time = emit_time
        self.branch_down = branch_down


@dataclass(slots=True)
class EntanglementRecord:
    partner: tuple  # (node name, memory index)
    fidelity: float
    expiration: int


# ---------------------------------------------------------------------------
# channels


class QuantumChannel:
    """One-way fibre from a router port to a BSM station.

    Transmission slots are spaced ``tdm_frame_ps`` apart and handed out
    round-robin to the registered sources: slot k belongs to source
    ``k % len(sources)``.
    """

    def __init__(self, name, timeline, sender, receiver, length_km, attenuation_db_per_km=0.2,
                 light_speed_m_per_s=2e8, tdm_frame_ps=20_000):
        if length_km < 0:
            raise ValueError(f"channel {name}: negative length")
        self.name = name
        self.timeline = timeline
        self.sender = sender
        self.receiver = receiver
        self.length_km = length_km
        self.attenuation = attenuation_db_per_km
        self.light_speed = light_speed_m_per_s
        self.frame = int(tdm_frame_ps)
        self.delay = int(round(length_km * 1000.0 / light_speed_m_per_s * SECOND))
        self.survival = transmittance(length_km, attenuation_db_per_km)
        self.sources = []
        self._source_index = {}
        self._booked = set()

    def register_source(self, source) -> int:
        if source in self._source_index:
            return self._source_index[source]
        self._source_index[source] = len(self.sources)
        self.sources.append(source)
        return self._source_index[source]

    def schedule_transmit(self, source, not_before=None) -> int:
        """Earliest slot at or after max(now, not_before) owned by ``source``."""
        try:
            idx = self._source_index[source]
        except KeyError:
            raise HardwareError(f"{self.name}: source {source!r} is not registered") from None
        t = self.timeline.now
        if not_before is not None and not_before > t:
            t = not_before
        n = len(self.sources)
        k = -(-t // self.frame)
        k += (idx - k) % n
        return k * self.frame

    def book_slot(self, source, not_before) -> int:
        """Like ``schedule_transmit`` but never hands out the same slot twice."""
        booked = self._booked
        n = len(self.sources)
        t = self.schedule_transmit(source, not_before)
        while t in booked:
            t += n * self.frame
        if len(booked) > 512:
            now = self.timeline.now
            self._booked = booked = {s for s in booked if s >= now}
        booked.add(t)
        return t

    def is_slot_of(self, source, at) -> bool:
        idx = self._source_index.get(source)
        if idx is None or at % self.frame:
            return False
        return (at // self.frame) % len(self.sources) == idx

    def transmit(self, photon, at=None) -> bool:
        """Send ``photon``; it arrives at ``receiver.receive_photon`` unless lost.

        Returns whether the photon survived the fibre.
        """
        tl = self.timeline
        if at is None:
            at = tl.now
        if tl.rng.random() < self.survival:
            tl.schedule(at + self.delay, self.receiver.receive_photon, photon)
            return True
        return False


class ClassicalChannel:
    """Lossless fixed-delay link. Equal delays plus sequence tie-breaking keep it FIFO."""

    def __init__(self, timeline, sender, receiver, one_way_delay_ps):
        if one_way_delay_ps < 0:
            raise ValueError("negative classical delay")
        self.timeline = timeline
        self.sender = sender
        self.receiver = receiver
        self.delay = int(one_way_delay_ps)

    def send(self, message):
        self.timeline.schedule(self.timeline.now + self.delay, self.receiver.receive, message)


# ---------------------------------------------------------------------------
# detector


class Detector:
    def __init__(self, name, timeline, efficiency=0.8, count_rate_hz=50e6, dark_count_rate_hz=0.0,
                 resolution_ps=100):
        if not 0.0 <= efficiency <= 1.0:
            raise ValueError(f"detector {name}: efficiency outside [0, 1]")
        self.name = name
        self.timeline = timeline
        self.efficiency = efficiency
        self.count_rate = count_rate_hz
        self.dark_count_rate = dark_count_rate_hz
        self.resolution = int(resolution_ps)
        self.dead_time = period_ps(count_rate_hz)
        self.next_ready_time = 0
        self.listener = None
        self.detections = 0
        self._dark_handle = None

    def register(self, arrival, photonic=True):
        """Return the quantised click time, or None if nothing is registered.

        Dark counts (``photonic=False``) are subject to dead time but not to
        the efficiency draw.
        """
        if arrival < self.next_ready_time:
            return None
        if photonic and self.timeline.rng.random() >= self.efficiency:
            return None
        self.next_ready_time = arrival + self.dead_time
        self.detections += 1
        return arrival - arrival % self.resolution

    def start_dark_counts(self):
        if self.dark_count_rate > 0 and self._dark_handle is None:
            self._schedule_dark()

    def _schedule_dark(self):
        tl = self.timeline
        gap = int(round(tl.exponential(self.dark_count_rate) * SECOND))
        self._dark_handle = tl.schedule(tl.now + gap, self._dark_count)

    def _dark_count(self):
        stamp = self.register(self.timeline.now, photonic=False)
        if stamp is not None and self.listener is not None:
            self.listener(self, stamp, False)
        self._schedule_dark()

    def stop_dark_counts(self):
        self.timeline.cancel(self._dark_handle)
        self._dark_handle = None


# ---------------------------------------------------------------------------
# memory

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass
class MemoryParams:
    efficiency: float = 0.75
    frequency_hz: float = 20e3
    coherence_time_s: float = 1.3
    cooperativity: float = 500.0
    gamma_hz: float = 14.0
    gamma_star_hz: float = 32.0
    delta_omega_hz: float = 0.0

    @property
    def fidelity(self) -> float:
        return entanglement_fidelity(self.cooperativity, self.gamma_hz, self.gamma_star_hz,
                                     self.delta_omega_hz)


class QuantumMemory:
    """Single-atom memory holding spin amplitudes alpha|down> + beta|up>."""

    __slots__ = ("node", "index", "timeline", "efficiency", "period", "coherence",
                 "fidelity", "alpha", "beta", "record", "next_excite_time", "lifetime_end",
                 "_expire_handle", "owner", "params")

    def __init__(self, node, index, timeline, params: MemoryParams | None = None):
        params = params or MemoryParams()
        self.node = node
        self.index = index
        self.timeline = timeline
        self.params = params
        self.efficiency = params.efficiency
        self.period = period_ps(params.frequency_hz)
        self.coherence = int(round(params.coherence_time_s * SECOND))
        self.fidelity = params.fidelity
        self.alpha = 1.0
        self.beta = 0.0
        self.record = None
        self.next_excite_time = 0
        self.lifetime_end = None
        self._expire_handle = None
        self.owner = None

    @property
    def memory_id(self):
        return (self.node, self.index)

    def __repr__(self):
        return f"QuantumMemory({self.node}[{self.index}])"

    # -- spin state ----------------------------------------------------

    def set_state(self, alpha, beta):
        norm = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise HardwareError(f"{self!r}: state not normalised (|a|^2+|b|^2={norm})")
        self.alpha = alpha
        self.beta = beta

    def set_plus(self):
        self.alpha = _INV_SQRT2
        self.beta = _INV_SQRT2

    def x_gate(self):
        self.alpha, self.beta = self.beta, self.alpha

    def reset(self):
        self.alpha = 1.0
        self.beta = 0.0

    def excite(self):
        """Excite |down> -> |e>; maybe emit a photon.

        One uniform draw decides both the ground-truth branch (down with
        probability |alpha|^2) and the emission (probability e*|alpha|^2),
        so an emission always implies the down branch.
        """
        tl = self.timeline
        now = tl.now
        if now < self.next_excite_time:
            raise HardwareError(
                f"{self!r}: excite at {now} ps before memory is ready at {self.next_excite_time} ps"
            )
        self.next_excite_time = now + self.period
        p_down = abs(self.alpha) ** 2
        u = tl.rng.random()
        if u < p_down:
            self.alpha, self.beta = 1.0, 0.0
            if u < self.efficiency * p_down:
                return Photon(self, now, True)
            return None
        self.alpha, self.beta = 0.0, 1.0
        return None

    # -- entanglement lifetime ----------------------------------------

    def start_lifetime(self, end):
        """Schedule expiry at absolute time ``end`` (replacing any earlier one)."""
        tl = self.timeline
        if self._expire_handle is not None:
            tl.cancel(self._expire_handle)
        self.lifetime_end = end
        self._expire_handle = tl.schedule(end, self.expire)

    def stop_lifetime(self):
        if self._expire_handle is not None:
            self.timeline.cancel(self._expire_handle)
            self._expire_handle = None
        self.lifetime_end = None

    def entangle(self, partner, fidelity, expiration):
        self.record = EntanglementRecord(partner, fidelity, expiration)
        if expiration != self.lifetime_end:
            self.start_lifetime(expiration)

    def clear(self):
        """Drop entanglement and lifetime; spin back to ground."""
        self.record = None
        self.stop_lifetime()
        self.reset()

    def expire(self):
        self._expire_handle = None
        self.lifetime_end = None
        self.record = None
        self.reset()
        if self.owner is not None:
            self.owner.memory_expired(self)
