class SimulationError(RuntimeError):
    """Base class for fatal simulation errors."""


class CausalityError(SimulationError):
    """An event was scheduled before the current simulation time."""


class EventError(SimulationError):
    """An event handler raised; the message names the failing event."""
