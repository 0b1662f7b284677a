"""
Free Gibbs Transport - Worker Pool

Fans independent work items (chains, path batches, samples) out over a
thread pool and returns results in input order. Reductions use a fixed
pairwise tree so sums do not depend on scheduling.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from core.config import THREADS_ENV

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)

DEFAULT_THREADS = 1


def thread_count(threads: Optional[int] = None) -> int:
    """Explicit value, else FGT_THREADS, else 1."""
    if threads is not None and threads > 0:
        return threads
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw) if raw else DEFAULT_THREADS
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV}={raw!r}")
        value = DEFAULT_THREADS
    return max(1, value)


def parallel_map(
    fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None
) -> List[R]:
    """Map fn over items; output order equals input order."""
    workers = min(thread_count(threads), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def tree_reduce(values: Sequence, add: Callable = None):
    """Pairwise-tree sum; ((v0+v1)+(v2+v3))+… independent of thread timing."""
    if not values:
        raise ValueError("tree_reduce needs at least one value")
    add = add or (lambda a, b: a + b)
    level = list(values)
    while len(level) > 1:
        nxt = [add(level[k], level[k + 1]) for k in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def chunks(count: int, size: int) -> List[range]:
    """Consecutive index ranges of at most size elements."""
    size = max(1, size)
    return [range(start, min(start + size, count)) for start in range(0, count, size)]
