"""
Deterministic work pool.

Results always come back in input order, whatever the worker count, so
parallel and sequential runs reduce identically. NPHC_THREADS caps the
number of workers.
"""

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from loguru import logger
from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: Optional[int] = None) -> int:
    """Number of workers: explicit request, else NPHC_THREADS, else cpu count."""
    env_value = os.getenv("NPHC_THREADS")
    cap = os.cpu_count() or 1
    if env_value:
        try:
            cap = max(1, int(env_value))
        except ValueError:
            logger.warning("Ignoring invalid NPHC_THREADS={!r}", env_value)
    if requested is None:
        return cap
    return max(1, min(int(requested), cap))


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None,
                processes: bool = False, progress: bool = False,
                desc: Optional[str] = None) -> List[R]:
    """
    Apply fn to every item and return the results in input order.

    Args:
        fn: Function to apply (must be picklable when processes=True)
        items: Inputs
        workers: Requested worker count (capped by NPHC_THREADS)
        processes: Use a process pool instead of threads (for GIL-bound work)
        progress: Show a tqdm progress bar
        desc: Progress bar label

    Returns:
        List of results, same order as items
    """
    items = list(items)
    n_workers = min(worker_count(workers), max(len(items), 1))

    if n_workers <= 1:
        iterator = map(fn, items)
        if progress:
            iterator = tqdm(iterator, total=len(items), desc=desc)
        return list(iterator)

    executor_cls = ProcessPoolExecutor if processes else ThreadPoolExecutor
    logger.debug("Running {} tasks on {} {} workers", len(items), n_workers,
                 "process" if processes else "thread")
    with executor_cls(max_workers=n_workers) as executor:
        iterator = executor.map(fn, items)
        if progress:
            iterator = tqdm(iterator, total=len(items), desc=desc)
        return list(iterator)
