"""Discrete-event kernel.

The event queue comes from the compiled ``_cqueue`` extension when it is
importable, otherwise from the pure-Python ``_pyqueue``. Setting the
environment variable ``QNETSIM_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pyqueue
from .errors import CausalityError, EventError, SimulationError

try:
    if os.environ.get("QNETSIM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python kernel requested")
    from . import _cqueue
except ImportError:
    _cqueue = None

EventQueue = _cqueue.EventQueue if _cqueue is not None else _pyqueue.EventQueue
HAVE_COMPILED = _cqueue is not None

from .timeline import RunSummary, Timeline, make_timeline  # noqa: E402

__all__ = [
    "CausalityError",
    "EventError",
    "EventQueue",
    "HAVE_COMPILED",
    "RunSummary",
    "SimulationError",
    "Timeline",
    "make_timeline",
]
