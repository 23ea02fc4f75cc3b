"""
Fork-join runtime behind the parallel primitives.

A pool wraps a ThreadPoolExecutor. numpy kernels release the GIL, so the
array-level work of the primitives runs concurrently. A fork issued from
inside a worker runs inline, which keeps nested forks free of deadlock and
leaves the outermost fork as the unit of parallelism.
"""

import atexit
import logging
import threading
from concurrent.futures import ThreadPoolExecutor, wait
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

from parallel_ist.configuration import default_threads
from parallel_ist.errors import ConfigurationError
from parallel_ist.instrumentation import active_probe, run_counted

logger = logging.getLogger(__name__)

T = TypeVar("T")

_worker_state = threading.local()


def _mark_worker() -> None:
    _worker_state.inside = True


def in_worker() -> bool:
    return getattr(_worker_state, "inside", False)


class ForkJoinPool:
    """Fixed-size pool executing fork-join task groups."""

    def __init__(self, threads: int):
        if threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self._executor: Optional[ThreadPoolExecutor] = None
        if threads > 1:
            self._executor = ThreadPoolExecutor(
                max_workers=threads,
                thread_name_prefix="ist-worker",
                initializer=_mark_worker,
            )

    def fork_join(self, thunks: Sequence[Callable[[], T]]) -> List[T]:
        """
        Run independent tasks and join them.

        Args:
            thunks: Zero-argument callables touching disjoint state

        Returns:
            Their results, in thunk order
        """
        if self._executor is None or len(thunks) <= 1 or in_worker():
            return [thunk() for thunk in thunks]

        parent_probe = active_probe()
        counted = parent_probe is not None
        futures = [self._executor.submit(run_counted, thunk, counted) for thunk in thunks]
        # Join everything before surfacing a failure so no task outlives the call.
        wait(futures)
        results: List[T] = []
        for future in futures:
            value, probe = future.result()
            if probe is not None:
                parent_probe.merge(probe)
            results.append(value)
        return results

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


_pools: Dict[int, ForkJoinPool] = {}
_pools_lock = threading.Lock()


def get_pool(threads: Optional[int] = None) -> ForkJoinPool:
    """Shared pool for a worker budget, created on first use."""
    threads = threads or default_threads()
    with _pools_lock:
        pool = _pools.get(threads)
        if pool is None:
            cpus = default_threads()
            if threads > cpus:
                logger.warning(f"Requested {threads} threads but only {cpus} CPUs are available")
            pool = ForkJoinPool(threads)
            _pools[threads] = pool
        return pool


@atexit.register
def shutdown_pools() -> None:
    with _pools_lock:
        for pool in _pools.values():
            pool.shutdown()
        _pools.clear()
