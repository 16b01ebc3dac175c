"""
Utilities for parallel processing.

This module provides functions for running tasks in parallel.
"""

import concurrent.futures
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

from .logging import get_logger

logger = get_logger()

T = TypeVar("T")
R = TypeVar("R")


def parallel_map_with_failures(
    func: Callable[[T], R],
    items: Iterable[T],
    max_workers: int = 4,
    timeout: Optional[float] = None,
    use_threads: bool = False,
) -> Tuple[List[Optional[R]], List[Tuple[int, Exception]]]:
    """Execute a function on multiple items in parallel, keeping input order.

    Args:
        func: The function to execute (must be picklable unless use_threads)
        items: The items to process
        max_workers: Maximum number of workers; 1 runs inline
        timeout: Timeout in seconds for the whole batch
        use_threads: Use a thread pool instead of a process pool

    Returns:
        Tuple of (results aligned with items, None where the task failed;
        list of (item index, exception) for every failure)
    """
    items = list(items)
    results: List[Optional[R]] = [None] * len(items)
    failures: List[Tuple[int, Exception]] = []

    if max_workers <= 1 or len(items) <= 1:
        for i, item in enumerate(items):
            try:
                results[i] = func(item)
                logger.debug(f"Successfully processed {item}")
            except Exception as e:
                logger.error(f"Error processing {item}: {e}")
                failures.append((i, e))
        return results, failures

    executor_cls = (
        concurrent.futures.ThreadPoolExecutor
        if use_threads
        else concurrent.futures.ProcessPoolExecutor
    )
    with executor_cls(max_workers=max_workers) as executor:
        future_to_index = {executor.submit(func, item): i for i, item in enumerate(items)}

        for future in concurrent.futures.as_completed(future_to_index, timeout=timeout):
            i = future_to_index[future]
            try:
                results[i] = future.result()
                logger.debug(f"Successfully processed {items[i]}")
            except Exception as e:
                logger.error(f"Error processing {items[i]}: {e}")
                failures.append((i, e))

    failures.sort(key=lambda f: f[0])
    return results, failures


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    max_workers: int = 4,
    timeout: Optional[float] = None,
    use_threads: bool = False,
) -> List[R]:
    """Execute a function on multiple items in parallel.

    Failed items are logged and left out of the result.

    Args:
        func: The function to execute
        items: The items to process
        max_workers: Maximum number of workers
        timeout: Timeout in seconds for the whole batch
        use_threads: Use a thread pool instead of a process pool

    Returns:
        List of successful results in input order
    """
    results, failures = parallel_map_with_failures(
        func, items, max_workers=max_workers, timeout=timeout, use_threads=use_threads
    )
    failed = {i for i, _ in failures}
    return [r for i, r in enumerate(results) if i not in failed]  # type: ignore[misc]
