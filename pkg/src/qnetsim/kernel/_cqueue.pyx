# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled event queue.

The heap holds plain C structs (time, seq, slot); callables and argument
tuples live in Python lists indexed by slot. Slots are recycled through a
free stack. A handle packs (seq << 32 | slot) so a stale handle can be
detected without a dictionary lookup.
"""

from cpython.mem cimport PyMem_Malloc, PyMem_Realloc, PyMem_Free
from libc.stdint cimport int64_t

from .errors import CausalityError, EventError

cdef int64_t SLOT_MASK = 0xFFFFFFFF


cdef struct Entry:
    int64_t time
    int64_t seq
    Py_ssize_t slot


def _describe(fn):
    owner = getattr(fn, "__self__", None)
    name = getattr(fn, "__qualname__", repr(fn))
    if owner is not None:
        return f"{getattr(owner, 'name', type(owner).__name__)}.{getattr(fn, '__name__', name)}"
    return name


cdef class EventQueue:
    cdef Entry* _heap
    cdef Py_ssize_t _size
    cdef Py_ssize_t _cap
    cdef int64_t* _slot_seq
    cdef Py_ssize_t* _free
    cdef Py_ssize_t _nfree
    cdef Py_ssize_t _slot_cap
    cdef list _fns
    cdef list _args
    cdef int64_t _seq
    cdef public int64_t now
    cdef readonly int64_t scheduled_count
    cdef readonly int64_t executed_count
    cdef readonly int64_t cancelled_count

    implementation = "cython"

    def __cinit__(self, *args, **kwargs):
        self._cap = 1024
        self._size = 0
        self._heap = <Entry*> PyMem_Malloc(self._cap * sizeof(Entry))
        self._slot_cap = 1024
        self._slot_seq = <int64_t*> PyMem_Malloc(self._slot_cap * sizeof(int64_t))
        self._free = <Py_ssize_t*> PyMem_Malloc(self._slot_cap * sizeof(Py_ssize_t))
        if self._heap == NULL or self._slot_seq == NULL or self._free == NULL:
            raise MemoryError()
        self._fns = [None] * self._slot_cap
        self._args = [None] * self._slot_cap
        cdef Py_ssize_t i
        for i in range(self._slot_cap):
            self._slot_seq[i] = -1
            self._free[i] = self._slot_cap - 1 - i
        self._nfree = self._slot_cap
        self._seq = 0
        self.now = 0

    def __dealloc__(self):
        PyMem_Free(self._heap)
        PyMem_Free(self._slot_seq)
        PyMem_Free(self._free)

    @property
    def pending_count(self):
        return self.scheduled_count - self.executed_count - self.cancelled_count

    cdef Py_ssize_t _take_slot(self) except -1:
        cdef Py_ssize_t i, old
        if self._nfree == 0:
            old = self._slot_cap
            self._slot_cap = old * 2
            self._slot_seq = <int64_t*> PyMem_Realloc(self._slot_seq, self._slot_cap * sizeof(int64_t))
            self._free = <Py_ssize_t*> PyMem_Realloc(self._free, self._slot_cap * sizeof(Py_ssize_t))
            if self._slot_seq == NULL or self._free == NULL:
                raise MemoryError()
            self._fns.extend([None] * old)
            self._args.extend([None] * old)
            for i in range(old):
                self._slot_seq[old + i] = -1
                self._free[i] = self._slot_cap - 1 - i
            self._nfree = old
        self._nfree -= 1
        return self._free[self._nfree]

    cdef inline void _release_slot(self, Py_ssize_t slot):
        self._slot_seq[slot] = -1
        self._free[self._nfree] = slot
        self._nfree += 1

    cdef int _push(self, int64_t time, int64_t seq, Py_ssize_t slot) except -1:
        cdef Py_ssize_t i, parent
        cdef Entry item
        if self._size == self._cap:
            self._cap *= 2
            self._heap = <Entry*> PyMem_Realloc(self._heap, self._cap * sizeof(Entry))
            if self._heap == NULL:
                raise MemoryError()
        item.time = time
        item.seq = seq
        item.slot = slot
        i = self._size
        self._size += 1
        while i > 0:
            parent = (i - 1) >> 1
            if (self._heap[parent].time < time or
                    (self._heap[parent].time == time and self._heap[parent].seq < seq)):
                break
            self._heap[i] = self._heap[parent]
            i = parent
        self._heap[i] = item
        return 0

    cdef inline bint _less(self, Py_ssize_t a, Py_ssize_t b):
        if self._heap[a].time != self._heap[b].time:
            return self._heap[a].time < self._heap[b].time
        return self._heap[a].seq < self._heap[b].seq

    cdef Entry _pop(self):
        cdef Entry top = self._heap[0]
        cdef Entry last
        cdef Py_ssize_t i, child, n
        self._size -= 1
        n = self._size
        if n > 0:
            last = self._heap[n]
            i = 0
            while True:
                child = 2 * i + 1
                if child >= n:
                    break
                if child + 1 < n and self._less(child + 1, child):
                    child += 1
                if (self._heap[child].time < last.time or
                        (self._heap[child].time == last.time and self._heap[child].seq < last.seq)):
                    self._heap[i] = self._heap[child]
                    i = child
                else:
                    break
            self._heap[i] = last
        return top

    def schedule(self, int64_t time, fn, *args):
        if time < self.now:
            raise CausalityError(
                f"event for {_describe(fn)} scheduled at {time} ps, before now={self.now} ps"
            )
        cdef Py_ssize_t slot = self._take_slot()
        cdef int64_t seq = self._seq
        self._seq += 1
        self._fns[slot] = fn
        self._args[slot] = args
        self._slot_seq[slot] = seq
        self._push(time, seq, slot)
        self.scheduled_count += 1
        return (seq << 32) | slot

    def schedule_after(self, int64_t delay, fn, *args):
        cdef int64_t time = self.now + delay
        if delay < 0:
            raise CausalityError(
                f"event for {_describe(fn)} scheduled at {time} ps, before now={self.now} ps"
            )
        cdef Py_ssize_t slot = self._take_slot()
        cdef int64_t seq = self._seq
        self._seq += 1
        self._fns[slot] = fn
        self._args[slot] = args
        self._slot_seq[slot] = seq
        self._push(time, seq, slot)
        self.scheduled_count += 1
        return (seq << 32) | slot

    def cancel(self, handle):
        if handle is None:
            return False
        cdef int64_t h = handle
        cdef Py_ssize_t slot = h & SLOT_MASK
        cdef int64_t seq = h >> 32
        if slot >= self._slot_cap or self._slot_seq[slot] != seq or self._fns[slot] is None:
            return False
        self._fns[slot] = None
        self._args[slot] = None
        self.cancelled_count += 1
        return True

    def _run(self, stop):
        cdef bint bounded = stop is not None
        cdef int64_t stop_t = stop if bounded else 0
        cdef Entry e
        cdef object fn
        cdef tuple args
        cdef int64_t executed = 0
        cdef list fns = self._fns
        cdef list argv = self._args
        while self._size > 0:
            if bounded and self._heap[0].time > stop_t:
                break
            e = self._pop()
            fn = fns[e.slot]
            if fn is None:
                self._release_slot(e.slot)
                continue
            args = argv[e.slot]
            fns[e.slot] = None
            argv[e.slot] = None
            self._release_slot(e.slot)
            self.now = e.time
            executed += 1
            try:
                fn(*args)
            except (CausalityError, EventError):
                self.executed_count += executed
                raise
            except Exception as exc:
                self.executed_count += executed
                raise EventError(
                    f"handler {_describe(fn)} failed at t={self.now} ps (seq {e.seq}): {exc!r}"
                ) from exc
            # handlers may grow the slot lists
            fns = self._fns
            argv = self._args
        self.executed_count += executed
        if bounded and stop_t > self.now:
            self.now = stop_t
        return executed
