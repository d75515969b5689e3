from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "MULTIWAY_THREADS"


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, threads)


def ordered_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    threads: Optional[int] = None,
    shuffle_seed: Optional[int] = None,
) -> List[R]:
    """Map ``fn`` over ``items`` and return results in input order.

    Work may run on a thread pool and, when ``shuffle_seed`` is given, in a
    shuffled order; callers always see the sequential result.
    """
    order = list(range(len(items)))
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(order)
    n = thread_count(threads)
    results: List[Optional[R]] = [None] * len(items)
    if n == 1 or len(items) < 2:
        for i in order:
            results[i] = fn(items[i])
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            futures = {i: pool.submit(fn, items[i]) for i in order}
            for i, fut in futures.items():
                results[i] = fut.result()
    return results  # type: ignore[return-value]
