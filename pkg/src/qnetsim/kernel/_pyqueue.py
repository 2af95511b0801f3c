"""Pure-Python event queue, used when the compiled core is unavailable.

Behaviour mirrors ``_cqueue.pyx`` exactly: identical (time, seq) ordering,
identical counters, identical cancellation semantics.
"""

from heapq import heappop, heappush

from .errors import CausalityError, EventError

# entry layout: [time, seq, fn, args]
_FN = 2


def _describe(fn):
    owner = getattr(fn, "__self__", None)
    name = getattr(fn, "__qualname__", repr(fn))
    if owner is not None:
        return f"{getattr(owner, 'name', type(owner).__name__)}.{getattr(fn, '__name__', name)}"
    return name


class EventQueue:
    """Binary-heap event queue with lazy cancellation."""

    implementation = "python"

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.now = 0
        self.scheduled_count = 0
        self.executed_count = 0
        self.cancelled_count = 0

    @property
    def pending_count(self):
        return self.scheduled_count - self.executed_count - self.cancelled_count

    def schedule(self, time, fn, *args):
        if time < self.now:
            raise CausalityError(
                f"event for {_describe(fn)} scheduled at {time} ps, before now={self.now} ps"
            )
        entry = [time, self._seq, fn, args]
        self._seq += 1
        self.scheduled_count += 1
        heappush(self._heap, entry)
        return entry

    def schedule_after(self, delay, fn, *args):
        return self.schedule(self.now + delay, fn, *args)

    def cancel(self, handle):
        if handle is None or handle[_FN] is None:
            return False
        handle[_FN] = None
        handle[3] = None
        self.cancelled_count += 1
        return True

    def _run(self, stop):
        heap = self._heap
        executed = 0
        try:
            while heap:
                entry = heap[0]
                if stop is not None and entry[0] > stop:
                    break
                heappop(heap)
                fn = entry[2]
                if fn is None:
                    continue
                self.now = entry[0]
                args = entry[3]
                entry[2] = None
                entry[3] = None
                executed += 1
                fn(*args)
        except (CausalityError, EventError):
            self.executed_count += executed
            raise
        except Exception as exc:
            self.executed_count += executed
            raise EventError(
                f"handler {_describe(fn)} failed at t={self.now} ps (seq {entry[1]}): {exc!r}"
            ) from exc
        self.executed_count += executed
        if stop is not None:
            self.now = max(self.now, stop)
        return executed
