"""Order-preserving map over independent work items."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "KERRTRAP_THREADS"


def thread_count(default: int = 1) -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    return max(1, n)


def pmap(func, items, threads: int | None = None) -> list:
    """``[func(x) for x in items]``, optionally on a thread pool; output order never depends on scheduling."""
    items = list(items)
    n = thread_count() if threads is None else max(1, threads)
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
