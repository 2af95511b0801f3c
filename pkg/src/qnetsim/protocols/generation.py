"""Two-round heralded entanglement generation between adjacent routers.

The router with the lower path index is the primary: it asks the neighbour's
resource manager for a partner instance and opens the timing negotiation. The
secondary books an emission slot on the link's BSM station and both sides
excite at that slot. The BSM station classifies every detection window and
reports it to both parties; two single-click windows in a row, both caused
by real photons, leave the memories entangled.
"""

from __future__ import annotations

import logging

from ..resource import ENTANGLED, RAW
from .base import ProtocolInstance
from .messages import Kind, MeasurementResult, Negotiate, NegotiateAck

log = logging.getLogger(__name__)

PAIRING, NEGOTIATING, WAIT_MR, DONE_SUCCESS, DONE_FAIL = (
    "PAIRING", "NEGOTIATING", "WAIT_MR", "DONE_SUCCESS", "DONE_FAIL")


class GenerationProtocol(ProtocolInstance):
    protocol = "generation"

    def __init__(self, rm, reservation, info, port, primary):
        super().__init__(rm, reservation, [info])
        self.info = info
        self.memory = info.memory
        self.port = port
        self.remote_node = port.neighbor
        self.mid_node = port.bsm.name
        self.primary = primary
        self.round = 0
        self.phase = PAIRING
        self.remote_memory = None
        self.emit_times = None
        self.remote_fidelity = None
        self.remote_coherence = None
        self.heralds = []
        self._excite_handle = None
        self.stats = rm.node.generation_stats

    # -- pairing ------------------------------------------------------

    def start(self):
        if self.primary:
            self.rm.pair_remote(self, "generation", self.remote_node, {"memory": self.info.index})
        else:
            self.rm.offer_generation(self)

    def bind(self, remote_instance, remote_memory):
        self.remote_instance = remote_instance
        self.remote_memory = remote_memory
        self.phase = NEGOTIATING

    def receive(self, msg):
        kind = msg.kind
        if kind == Kind.MR:
            self._on_measurement(msg)
        elif kind == Kind.PAIR_ACCEPT:
            self.bind(msg.remote_instance, msg.info["memory"])
            self._negotiate()
        elif kind == Kind.NEGOTIATE:
            self._on_negotiate(msg)
        elif kind == Kind.NEGOTIATE_ACK:
            self._on_ack(msg)
        elif kind == Kind.PAIR_DECLINE:
            self.terminate(notify=False, backoff=self.decline_backoff(self.remote_node))

    # -- negotiation --------------------------------------------------

    def _negotiate(self):
        mem = self.memory
        now = self.timeline.now
        self.rm.send(Negotiate(self.rm.name, self.remote_node, self.remote_instance,
                               max(now, mem.next_excite_time), mem.period, self.port.qchannel.delay,
                               mem.fidelity, mem.coherence))

    def _on_negotiate(self, msg):
        mem = self.memory
        now = self.timeline.now
        port = self.port
        cdelay = self.rm.node.delay_to(self.remote_node)
        earliest = max(now + cdelay, mem.next_excite_time, msg.next_excite_time)
        bsm = port.bsm
        t1 = bsm.book_slot(earliest)
        # the MR of round 1 must be back before round 2; both halves are equal length
        mr_back = t1 + port.qchannel.delay + bsm.window + port.bsm_delay
        t2 = bsm.book_slot(max(mr_back, t1 + max(mem.period, msg.memory_period)))
        self.emit_times = (t1, t2)
        self.remote_fidelity = msg.fidelity
        self.remote_coherence = msg.coherence
        self.rm.send(NegotiateAck(self.rm.name, self.remote_node, self.remote_instance,
                                  self.emit_times, mem.fidelity, mem.coherence))
        self._arm(1)

    def _on_ack(self, msg):
        self.emit_times = msg.emit_times
        self.remote_fidelity = msg.fidelity
        self.remote_coherence = msg.coherence
        self._arm(1)

    def _arm(self, round_):
        self.round = round_
        self.phase = WAIT_MR
        self._excite_handle = self.timeline.schedule(self.emit_times[round_ - 1], self._excite)

    # -- photonics ----------------------------------------------------

    def _excite(self):
        self._excite_handle = None
        mem = self.memory
        now = self.timeline.now
        if self.round == 1:
            mem.set_plus()
            # lifetime of the pair counts from the first excitation; only arm the
            # timer now if it could run out before the last MR is back
            port = self.port
            end = now + min(mem.coherence, self.remote_coherence)
            if end <= self.emit_times[1] + port.qchannel.delay + port.bsm.window + port.bsm_delay:
                mem.start_lifetime(end)
        port = self.port
        qc = port.qchannel
        port.bsm.expect(now + qc.delay, self)
        photon = mem.excite()
        if photon is not None:
            qc.transmit(photon, now)

    def _on_measurement(self, msg):
        if msg.round != self.round:
            return
        self.heralds.append(msg.herald)
        if msg.clicks != 1:
            self._fail((self.round, msg.clicks))
            return
        if self.round == 1:
            self.memory.x_gate()
            self._arm(2)
            return
        if all(self.heralds):
            self._succeed()
        else:
            self._fail((2, "dark"))

    def _succeed(self):
        self.phase = DONE_SUCCESS
        mem = self.memory
        fidelity = min(mem.fidelity, self.remote_fidelity)
        expiration = self.emit_times[0] + min(mem.coherence, self.remote_coherence)
        mem.entangle((self.remote_node, self.remote_memory), fidelity, expiration)
        self.stats[0] += 1
        self.finish([(self.info, ENTANGLED)])

    def _fail(self, reason):
        self.phase = DONE_FAIL
        self.stats[1] += 1
        why = self.rm.node.generation_failures
        why[reason] = why.get(reason, 0) + 1
        self.finish([(self.info, RAW)])

    def cleanup(self):
        if self._excite_handle is not None:
            self.timeline.cancel(self._excite_handle)
            self._excite_handle = None
        if self.phase == PAIRING and not self.primary:
            self.rm.withdraw_generation(self)


class _Window:
    __slots__ = ("arrival", "parties", "mask", "herald")

    def __init__(self, arrival):
        self.arrival = arrival
        self.parties = []
        self.mask = 0  # bit i set once detector i has clicked
        self.herald = True

    @property
    def clicks(self):
        return (self.mask & 1) + (self.mask >> 1)

    @property
    def detector(self):
        return {1: 0, 2: 1}.get(self.mask, -1)


class BSMStation:
    """Beam splitter plus two detectors at the middle of a link.

    Each photon leaves the splitter towards either detector with probability
    1/2. A window opens at the expected arrival time announced by the
    emitting routers and closes ``window`` ps later; its click pattern is
    reported to every party in an MR message.
    """

    def __init__(self, node, timeline, detectors, window, frame):
        self.node = node
        self.name = node.name
        self.timeline = timeline
        self.detectors = detectors
        self.window = int(window)
        self.frame = int(frame)
        self._windows = {}
        self._open = []
        self._booked = set()
        self.mr_sent = 0
        for det in detectors:
            det.listener = self._on_dark_click

    def book_slot(self, not_before):
        frame = self.frame
        t = -(-not_before // frame) * frame
        booked = self._booked
        while t in booked:
            t += frame
        if len(booked) > 1024:
            now = self.timeline.now
            self._booked = booked = {s for s in booked if s >= now}
        booked.add(t)
        return t

    def expect(self, arrival, party):
        win = self._windows.get(arrival)
        if win is None:
            win = self._windows[arrival] = _Window(arrival)
            self._open.append(win)
            self.timeline.schedule(arrival + self.window, self._close, win)
        win.parties.append((party.rm.name, party.id, party.round))

    def receive_photon(self, photon):
        now = self.timeline.now
        win = self._windows.get(now)
        det_index = 0 if self.timeline.rng.random() < 0.5 else 1
        stamp = self.detectors[det_index].register(now)
        if stamp is None or win is None:
            return
        self._click(win, det_index, True)

    def _on_dark_click(self, detector, stamp, photonic):
        now = self.timeline.now
        for win in self._open:
            if win.arrival <= now < win.arrival + self.window:
                self._click(win, self.detectors.index(detector), photonic)
                return

    @staticmethod
    def _click(win, det_index, photonic):
        win.mask |= 1 << det_index
        win.herald = win.herald and photonic

    def _close(self, win):
        del self._windows[win.arrival]
        self._open.remove(win)
        clicks = win.clicks if len(win.parties) >= 2 else 0
        detector = win.detector if clicks == 1 else -1
        herald = win.herald and clicks == 1
        channels = self.node.cchannels
        msgs = [MeasurementResult(self.name, node, instance, round_, clicks, detector, herald)
                for node, instance, round_ in win.parties]
        self.mr_sent += len(msgs)
        delays = {channels[m.dst].delay for m in msgs}
        if len(msgs) > 1 and len(delays) == 1:
            # both halves of a link are equally long: one event carries both MRs, in
            # the order separate sends would have delivered them
            self.timeline.schedule(self.timeline.now + delays.pop(), self._deliver, msgs)
        else:
            send = self.node.send
            for msg in msgs:
                send(msg)

    def _deliver(self, msgs):
        channels = self.node.cchannels
        for msg in msgs:
            channels[msg.dst].receiver.receive(msg)
