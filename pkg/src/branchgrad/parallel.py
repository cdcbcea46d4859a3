"""Order-preserving map over worker processes.

Results are collected in input order and every task's randomness is
addressed by its own index, so output is identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

__all__ = ["pmap"]


def pmap(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
