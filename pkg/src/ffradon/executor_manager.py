"""
Executor manager for running independent verification work items on a
thread pool.

Work is submitted as a list of items and results come back in item order,
never completion order, so reports are identical for any thread count.
"""

from __future__ import annotations

import concurrent.futures
from typing import Callable, Iterable, List, Optional, TypeVar

from ffradon.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class ExecutorManager:
    """Manages a thread pool executor for CPU-bound verification work."""

    def __init__(self, max_workers: Optional[int] = None) -> None:
        """
        Initialize executor manager.

        Args:
            max_workers: Number of worker threads. Defaults to the pool default.
                         One worker runs items inline without a pool.
        """
        self.max_workers = max_workers
        self.executor: Optional[concurrent.futures.ThreadPoolExecutor] = None
        if max_workers is None or max_workers > 1:
            self.executor = concurrent.futures.ThreadPoolExecutor(
                max_workers=max_workers,
                thread_name_prefix="ffradon-worker",
            )
        logger.debug("ExecutorManager initialized with %s workers", max_workers or "default")

    def map_ordered(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Apply *func* to every item and return the results in item order.

        Exceptions raised by a work item propagate to the caller.
        """
        items = list(items)
        if self.executor is None or len(items) <= 1:
            return [func(item) for item in items]
        return list(self.executor.map(func, items))

    def shutdown(self, wait: bool = True) -> None:
        """Shutdown the executor."""
        logger.debug("Shutting down executor (wait=%s)", wait)
        if self.executor is not None:
            self.executor.shutdown(wait=wait)

    def __enter__(self) -> "ExecutorManager":
        return self

    def __exit__(self, *exc: object) -> None:
        self.shutdown()


def run_ordered(
    func: Callable[[T], R],
    items: Iterable[T],
    executor: Optional[ExecutorManager] = None,
) -> List[R]:
    """Run through *executor* when given, inline otherwise."""
    if executor is None:
        return [func(item) for item in items]
    return executor.map_ordered(func, items)
