"""Thread fan-out for numpy-heavy loops (numpy releases the GIL).

Work is split into fixed index ranges and each range writes its own slice,
so results do not depend on the number of threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def run_chunks(work, n: int, threads: int = 1, min_chunk: int = 64):
    """Call work(lo, hi) over a partition of range(n)."""
    threads = max(1, int(threads or 1))
    if threads == 1 or n < 2 * min_chunk:
        work(0, n)
        return
    k = min(threads, max(1, n // min_chunk))
    bounds = [n * c // k for c in range(k + 1)]
    with ThreadPoolExecutor(max_workers=k) as ex:
        futs = [ex.submit(work, bounds[c], bounds[c + 1]) for c in range(k)]
        for f in futs:
            f.result()


def map_ordered(fn, items, threads: int = 1):
    """list(map(fn, items)) with optional threads, preserving order."""
    items = list(items)
    threads = max(1, int(threads or 1))
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))
