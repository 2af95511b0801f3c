"""Per-node resource management: memory lifecycle tracking and rule-driven allocation."""

from __future__ import annotations

import bisect
import itertools
import logging
from collections import deque

from .protocols.messages import Kind, PairAccept, PairDecline, PairRequest, Terminate

log = logging.getLogger(__name__)


class MemoryState:
    # plain interned strings: cheaper to hash than Enum members on the hot path
    RAW = "RAW"
    ENTANGLED = "ENTANGLED"
    OCCUPIED = "OCCUPIED"
    ALL = (RAW, ENTANGLED, OCCUPIED)


RAW = MemoryState.RAW
ENTANGLED = MemoryState.ENTANGLED
OCCUPIED = MemoryState.OCCUPIED

# ENTANGLED -> OCCUPIED happens when a purification, swapping or delivery rule
# claims an entangled memory.
LEGAL_TRANSITIONS = frozenset({
    (RAW, OCCUPIED),
    (OCCUPIED, RAW),
    (OCCUPIED, ENTANGLED),
    (ENTANGLED, RAW),
    (ENTANGLED, OCCUPIED),
})


class ResourceError(RuntimeError):
    pass


class MemoryInfo:
    __slots__ = ("index", "memory", "state", "reservation", "remote", "owner")

    def __init__(self, index, memory):
        self.index = index
        self.memory = memory
        self.state = RAW
        self.reservation = None  # reservation id this memory is assigned to
        self.remote = None  # neighbour this memory generates entanglement with
        self.owner = None

    @property
    def entanglement(self):
        return self.memory.record

    def __repr__(self):
        return f"MemoryInfo({self.memory.node}[{self.index}], {self.state})"


class MemoryManager:
    """Tracks RAW/ENTANGLED/OCCUPIED for every memory of one node.

    Entangled, unowned memories are indexed by (reservation, partner node)
    so rule conditions can find purification and swapping partners without
    scanning the whole array.
    """

    def __init__(self, memories, on_change=None):
        self.infos = [MemoryInfo(i, m) for i, m in enumerate(memories)]
        self.counts = {RAW: len(self.infos), ENTANGLED: 0, OCCUPIED: 0}
        self.on_change = on_change
        self._entangled = {}
        self.transitions = {}

    def __len__(self):
        return len(self.infos)

    def update(self, info, state):
        old = info.state
        if old is state:
            return
        if (old, state) not in LEGAL_TRANSITIONS:
            raise ResourceError(f"illegal memory transition {old} -> {state} for {info!r}")
        if state is ENTANGLED and info.memory.record is None:
            raise ResourceError(f"{info!r} marked ENTANGLED without an entanglement record")
        if old is ENTANGLED:
            self._unindex(info)
        info.state = state
        if state is ENTANGLED:
            self._index(info)
        counts = self.counts
        counts[old] -= 1
        counts[state] += 1
        key = (old, state)
        self.transitions[key] = self.transitions.get(key, 0) + 1
        if self.on_change is not None:
            self.on_change(counts)

    def _index(self, info):
        by_remote = self._entangled.setdefault(info.reservation, {})
        by_remote.setdefault(info.memory.record.partner[0], {})[info.index] = info

    def _unindex(self, info):
        by_remote = self._entangled.get(info.reservation)
        if by_remote is None:
            return
        for group in by_remote.values():
            if group.pop(info.index, None) is not None:
                return

    def entangled_with(self, reservation, remote_node):
        """Entangled, unowned memories of ``reservation`` whose partner lives on ``remote_node``."""
        by_remote = self._entangled.get(reservation)
        if not by_remote:
            return ()
        group = by_remote.get(remote_node)
        return group.values() if group else ()

    def fractions(self):
        n = len(self.infos)
        return (self.counts[RAW] / n, self.counts[ENTANGLED] / n, self.counts[OCCUPIED] / n)


class Rule:
    """(priority, condition, action), scoped to one reservation and time window.

    ``condition(info, rm)`` returns the list of memories to claim or None;
    ``action(rm, infos)`` creates the protocol instance that owns them.
    Lower priority values are evaluated first.
    """

    __slots__ = ("priority", "condition", "action", "reservation", "start", "end", "name", "order")

    def __init__(self, priority, condition, action, reservation=None, start=0, end=None, name=""):
        self.priority = priority
        self.condition = condition
        self.action = action
        self.reservation = reservation
        self.start = start
        self.end = end
        self.name = name or getattr(action, "__name__", "rule")
        self.order = 0

    def active(self, now):
        return self.start <= now and (self.end is None or now <= self.end)

    def sort_key(self):
        return (self.priority, self.order)

    def __repr__(self):
        return f"Rule({self.name}, priority={self.priority}, reservation={self.reservation})"


class RuleManager:
    def __init__(self):
        self.rules = []
        self._keys = []
        self._counter = itertools.count()

    def install(self, rule):
        rule.order = next(self._counter)
        key = rule.sort_key()
        pos = bisect.bisect_right(self._keys, key)
        self._keys.insert(pos, key)
        self.rules.insert(pos, rule)

    def uninstall(self, rule):
        pos = self.rules.index(rule)
        del self.rules[pos]
        del self._keys[pos]

    def uninstall_expired(self, now):
        """Remove rules whose window ended before ``now``; return them."""
        expired = [r for r in self.rules if r.end is not None and r.end < now]
        for rule in expired:
            self.uninstall(rule)
        return expired

    def uninstall_reservation(self, reservation):
        removed = [r for r in self.rules if r.reservation == reservation]
        for rule in removed:
            self.uninstall(rule)
        return removed

    def evaluate(self, info, rm, now):
        """Fire the first active rule whose condition matches ``info``."""
        if info.state is OCCUPIED:
            return None
        for rule in self.rules:
            if rule.reservation is not None and rule.reservation != info.reservation:
                continue
            if not rule.active(now):
                continue
            claimed = rule.condition(info, rm)
            if claimed:
                rule.action(rm, claimed)
                return rule
        return None


class ResourceManager:
    """Memory manager + rule manager + protocol-instance registry for one router."""

    def __init__(self, node, timeline, memories, on_change=None):
        self.node = node
        self.name = node.name
        self.timeline = timeline
        self.memory_manager = MemoryManager(memories, on_change)
        self.rule_manager = RuleManager()
        self.instances = {}
        self._ids = itertools.count(1)
        self.gen_waiting = {}
        self.gen_requests = {}
        self.active_reservations = set()
        self.decline_backoff = 0
        for info in self.memory_manager.infos:
            info.memory.owner = self
        self.fired = []  # (time, rule name) trace, only filled when trace_rules is set
        self.trace_rules = False

    @property
    def infos(self):
        return self.memory_manager.infos

    def new_id(self):
        return next(self._ids)

    # -- memory lifecycle ---------------------------------------------

    def allocate(self, instance, infos):
        """Hand ``infos`` to ``instance``; they become OCCUPIED atomically."""
        update = self.memory_manager.update
        for info in infos:
            if info.owner is not None or info.state is OCCUPIED:
                raise ResourceError(f"{info!r} is already owned by {info.owner!r}")
        for info in infos:
            update(info, OCCUPIED)
            info.owner = instance
        self.instances[instance.id] = instance

    def release(self, info, state, evaluate=True):
        """Return a memory from its owner in ``state`` (RAW clears the memory)."""
        info.owner = None
        if state is RAW:
            info.memory.clear()
        self.memory_manager.update(info, state)
        if evaluate:
            self.evaluate(info)

    def update(self, info, state):
        self.memory_manager.update(info, state)
        self.evaluate(info)

    def evaluate(self, info):
        """Re-run the rules for one memory.

        A rule may claim memories other than ``info`` (purification picks the
        lowest-fidelity pair), so keep going while ``info`` is still free.
        """
        fired = None
        while info.reservation is not None and info.state is not OCCUPIED:
            rule = self.rule_manager.evaluate(info, self, self.timeline.now)
            if rule is None:
                break
            fired = rule
            if self.trace_rules:
                self.fired.append((self.timeline.now, rule.name, info.index))
        return fired

    def consume(self, info):
        """Hand an entangled memory to the application: it is free again at once."""
        info.memory.clear()
        self.memory_manager.update(info, RAW)
        self.evaluate(info)

    def evaluate_later(self, info, delay):
        self.timeline.schedule(self.timeline.now + delay, self.evaluate, info)

    def unregister(self, instance):
        self.instances.pop(instance.id, None)

    def memory_expired(self, memory):
        info = self.memory_manager.infos[memory.index]
        if info.owner is not None:
            info.owner.memory_expired(info)
        elif info.state is ENTANGLED:
            self.memory_manager.update(info, RAW)
            self.evaluate(info)

    # -- messaging ----------------------------------------------------

    def send(self, message):
        self.node.send(message)

    def pair_remote(self, instance, protocol, remote_node, info):
        self.send(PairRequest(self.name, remote_node, protocol, instance.reservation,
                              instance.id, info))

    def terminate_remote(self, remote_node, remote_instance):
        self.send(Terminate(self.name, remote_node, remote_instance))

    def receive(self, msg):
        kind = msg.kind
        if kind == Kind.PAIR_REQUEST:
            self._on_pair_request(msg)
            return
        inst = self.instances.get(msg.instance)
        if inst is None:
            log.debug("%s: stale %s for instance %s", self.name, kind, msg.instance)
            if kind == Kind.PAIR_ACCEPT:
                # the acceptor has locked memories for an instance that is gone
                self.send(Terminate(self.name, msg.src, msg.remote_instance))
            return
        if kind == Kind.TERMINATE:
            inst.terminate(notify=False)
        else:
            inst.receive(msg)

    def _on_pair_request(self, msg):
        from .protocols import RESPONDERS

        if msg.reservation not in self.active_reservations:
            self.send(PairDecline(self.name, msg.src, msg.instance, "reservation inactive"))
            return
        if msg.protocol == "generation":
            key = (msg.reservation, msg.src)
            waiting = self.gen_waiting.get(key)
            if waiting:
                self._bind_generation(waiting.popleft(), msg)
            else:
                self.gen_requests.setdefault(key, deque()).append(msg)
            return
        instance = RESPONDERS[msg.protocol](self, msg)
        if instance is None:
            self.send(PairDecline(self.name, msg.src, msg.instance, "no eligible memory"))
        else:
            self.send(PairAccept(self.name, msg.src, msg.instance, instance.id,
                                 instance.accept_info()))
            instance.start()

    def offer_generation(self, instance):
        """Match a freshly created responder-side generation instance."""
        key = (instance.reservation, instance.remote_node)
        queued = self.gen_requests.get(key)
        if queued:
            self._bind_generation(instance, queued.popleft())
        else:
            self.gen_waiting.setdefault(key, deque()).append(instance)

    def withdraw_generation(self, instance):
        waiting = self.gen_waiting.get((instance.reservation, instance.remote_node))
        if waiting:
            try:
                waiting.remove(instance)
            except ValueError:
                pass

    def _bind_generation(self, instance, request):
        instance.bind(request.instance, request.info["memory"])
        self.send(PairAccept(self.name, request.src, request.instance, instance.id,
                             {"memory": instance.info.index}))

    # -- reservations -------------------------------------------------

    def activate(self, reservation_id, assignments):
        """Assign memories to a reservation. ``assignments`` maps neighbour -> count."""
        self.active_reservations.add(reservation_id)
        free = (i for i in self.memory_manager.infos if i.reservation is None and i.state is RAW)
        chosen = []
        for remote, count in assignments:
            for _ in range(count):
                info = next(free, None)
                if info is None:
                    raise ResourceError(
                        f"{self.name}: not enough free memories for reservation {reservation_id}"
                    )
                info.reservation = reservation_id
                info.remote = remote
                chosen.append(info)
        for info in chosen:
            self.evaluate(info)
        return chosen

    def deactivate(self, reservation_id):
        """Tear down a reservation: drop its rules, kill its instances, free its memories."""
        self.active_reservations.discard(reservation_id)
        self.rule_manager.uninstall_reservation(reservation_id)
        for inst in [i for i in self.instances.values() if i.reservation == reservation_id]:
            inst.terminate(notify=False, evaluate=False)
        for key in [k for k in self.gen_waiting if k[0] == reservation_id]:
            del self.gen_waiting[key]
        for key in [k for k in self.gen_requests if k[0] == reservation_id]:
            del self.gen_requests[key]
        update = self.memory_manager.update
        for info in self.memory_manager.infos:
            if info.reservation == reservation_id:
                if info.state is not RAW:
                    info.owner = None
                    info.memory.clear()
                    update(info, RAW)
                info.reservation = None
                info.remote = None
