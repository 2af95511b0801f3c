"""Common lifecycle for protocol instances owned by a resource manager."""

from __future__ import annotations

from ..resource import ENTANGLED, RAW


class ProtocolInstance:
    """Owns a set of memories from creation until ``finish``.

    Subclasses implement ``receive`` and may override ``cleanup`` to cancel
    pending events. ``terminate`` hands memories back in whatever state their
    records justify: ENTANGLED if a record is still held, RAW otherwise.
    """

    protocol = "base"

    def __init__(self, rm, reservation, infos):
        self.rm = rm
        self.timeline = rm.timeline
        self.id = rm.new_id()
        self.reservation = reservation
        self.infos = list(infos)
        self.alive = True
        self.remote_node = None
        self.remote_instance = None
        rm.allocate(self, self.infos)

    def __repr__(self):
        return f"{type(self).__name__}({self.rm.name}#{self.id})"

    @property
    def name(self):
        return f"{self.rm.name}.{self.protocol}#{self.id}"

    def start(self):
        pass

    def receive(self, msg):
        raise NotImplementedError

    def accept_info(self):
        return {}

    def cleanup(self):
        pass

    def finish(self, outcomes, evaluate=True, backoff=0):
        """Release memories; ``outcomes`` is a list of (info, state)."""
        if not self.alive:
            return
        self.alive = False
        self.cleanup()
        rm = self.rm
        rm.unregister(self)
        update = rm.memory_manager.update
        for info, state in outcomes:
            info.owner = None
            if state is RAW:
                info.memory.clear()
            update(info, state)
        if not evaluate:
            return
        for info, _ in outcomes:
            if backoff:
                rm.evaluate_later(info, backoff)
            else:
                rm.evaluate(info)

    def terminate(self, notify=True, evaluate=True, backoff=0):
        if not self.alive:
            return
        if notify:
            self.notify_terminate()
        outcomes = [(i, ENTANGLED if i.memory.record is not None else RAW) for i in self.infos]
        self.finish(outcomes, evaluate, backoff)

    def notify_terminate(self):
        if self.remote_instance is not None:
            self.rm.terminate_remote(self.remote_node, self.remote_instance)

    def memory_expired(self, info):
        self.terminate(notify=True)

    def decline_backoff(self, remote_node):
        return max(2 * self.rm.node.delay_to(remote_node), self.rm.decline_backoff, 1)
