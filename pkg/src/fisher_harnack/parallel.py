"""Thread-pool helper with ordered results."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "FISHER_HARNACK_THREADS"


def worker_count(default: int | None = None) -> int:
    """Worker cap from ``FISHER_HARNACK_THREADS``, else ``default`` or the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, default or os.cpu_count() or 1)


def ordered_map(func, items, workers: int | None = None) -> list:
    """``[func(x) for x in items]`` evaluated concurrently, returned in input order."""
    items = list(items)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
