"""Small shared utilities."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_THREAD_ENV = "ENTROFLOW_THREADS"


def thread_count() -> int:
    raw = os.environ.get(_THREAD_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items):
    """Map preserving order; threaded when ENTROFLOW_THREADS > 1.

    Results are reduced in input order, so threading cannot change any
    downstream floating-point reduction.
    """
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
