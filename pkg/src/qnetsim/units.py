"""Time units. Simulation time is an integer count of picoseconds."""

PS = 1
NS = 1_000
US = 1_000_000
MS = 1_000_000_000
SECOND = 1_000_000_000_000


def seconds(value: float) -> int:
    """Convert seconds to integer picoseconds, rounding to nearest."""
    return int(round(value * SECOND))


def to_seconds(ticks: int) -> float:
    return ticks / SECOND
