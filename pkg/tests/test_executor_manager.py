"""
Unit tests for ExecutorManager ordering and error propagation.
"""

import time

import pytest

from ffradon.executor_manager import ExecutorManager, run_ordered


def slow_square(x):
    # later items finish first
    time.sleep(0.001 * (10 - x))
    return x * x


def test_results_in_item_order():
    with ExecutorManager(max_workers=4) as manager:
        assert manager.map_ordered(slow_square, range(10)) == [x * x for x in range(10)]


def test_single_worker_runs_inline():
    manager = ExecutorManager(max_workers=1)
    assert manager.executor is None
    assert manager.map_ordered(slow_square, [3, 1]) == [9, 1]
    manager.shutdown()


def test_exceptions_propagate():
    def boom(x):
        if x == 2:
            raise ValueError("bad item")
        return x

    with ExecutorManager(max_workers=3) as manager:
        with pytest.raises(ValueError, match="bad item"):
            manager.map_ordered(boom, range(5))


def test_run_ordered_without_executor():
    assert run_ordered(slow_square, [1, 2, 3]) == [1, 4, 9]
