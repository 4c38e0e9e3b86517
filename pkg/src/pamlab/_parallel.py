"""Order-preserving map with an optional process pool.

Results are always assembled in input order, so outputs are identical for
any worker count; `workers <= 1` degrades to a plain loop. Worker functions
must be module-level (picklable).
"""

from __future__ import annotations

import concurrent.futures

__all__ = ["parallel_map"]


def parallel_map(fn, items, workers=1):
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (workers * 4))
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=chunk))
