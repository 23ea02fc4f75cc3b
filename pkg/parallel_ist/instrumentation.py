"""Per-task instrumentation counters, merged at fork-join boundaries."""

from contextvars import ContextVar
from typing import Callable, Optional, Tuple, TypeVar

from models.batch_models import CounterSnapshot

T = TypeVar("T")


class Probe:
    """Mutable counters owned by a single task."""

    __slots__ = ("nodes_visited", "searches", "rebuilds", "rebuilt_keys")

    def __init__(self) -> None:
        self.nodes_visited = 0
        self.searches = 0
        self.rebuilds = 0
        self.rebuilt_keys = 0

    def merge(self, other: "Probe") -> None:
        self.nodes_visited += other.nodes_visited
        self.searches += other.searches
        self.rebuilds += other.rebuilds
        self.rebuilt_keys += other.rebuilt_keys

    def snapshot(self) -> CounterSnapshot:
        return CounterSnapshot(
            nodes_visited=self.nodes_visited,
            searches=self.searches,
            rebuilds=self.rebuilds,
            rebuilt_keys=self.rebuilt_keys,
        )


# None means instrumentation is off; hot paths test for it and skip counting.
_probe: ContextVar[Optional[Probe]] = ContextVar("ist_probe", default=None)


def active_probe() -> Optional[Probe]:
    return _probe.get()


def enable_counters() -> None:
    """Turn counting on in the calling context (keeps existing totals)."""
    if _probe.get() is None:
        _probe.set(Probe())


def disable_counters() -> None:
    _probe.set(None)


def reset_counters() -> None:
    """Zero the counters; enables them if they were off."""
    _probe.set(Probe())


def counters() -> CounterSnapshot:
    """Snapshot of the calling context's counters (all zeros when disabled)."""
    probe = _probe.get()
    return probe.snapshot() if probe is not None else CounterSnapshot()


def run_counted(fn: Callable[[], T], counted: bool) -> Tuple[T, Optional[Probe]]:
    """Run a forked task with its own probe and hand the probe back for merging."""
    if not counted:
        token = _probe.set(None)
        try:
            return fn(), None
        finally:
            _probe.reset(token)
    local = Probe()
    token = _probe.set(local)
    try:
        return fn(), local
    finally:
        _probe.reset(token)
