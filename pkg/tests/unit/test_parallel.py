"""
Tests for the parallel processing utilities.
"""

import time
from concurrent.futures import TimeoutError

import pytest

from facepulse.utils.parallel import parallel_map, parallel_map_with_failures


def _double(x):
    return x * 2


def _fail_even(x):
    if x % 2 == 0:
        raise ValueError(f"Error for {x}")
    return x * 2


def test_parallel_map_success():
    """Test parallel_map with successful processing in a process pool."""
    items = [1, 2, 3, 4, 5]
    results = parallel_map(_double, items, max_workers=2)

    assert results == [2, 4, 6, 8, 10]


def test_parallel_map_with_errors():
    """Test parallel_map with some failing tasks."""
    items = [1, 2, 3, 4, 5]

    # Should not raise an exception, but the failed results are missing
    results = parallel_map(_fail_even, items, max_workers=2, use_threads=True)

    assert results == [2, 6, 10]


def test_parallel_map_with_failures_reports_indices():
    """Test that failures carry the index of their item and results keep order."""
    results, failures = parallel_map_with_failures(_fail_even, [1, 2, 3, 4], max_workers=2)

    assert results == [2, None, 6, None]
    assert [i for i, _ in failures] == [1, 3]
    assert all(isinstance(e, ValueError) for _, e in failures)


def test_parallel_map_inline():
    """Test that a single worker runs inline and still collects failures."""
    results, failures = parallel_map_with_failures(_fail_even, [2, 3], max_workers=1)

    assert results == [None, 6]
    assert len(failures) == 1


def test_parallel_map_timeout():
    """Test parallel_map with timeout."""

    def slow_func(x):
        time.sleep(1.0)
        return x

    with pytest.raises(TimeoutError):
        parallel_map(slow_func, [1, 2, 3], max_workers=2, timeout=0.2, use_threads=True)
