"""
Order-stable parallel maps.

Results are always returned in input order and work is split at boundaries
that never depend on the worker count, so any ``threads`` value produces
bitwise-identical output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

CHUNK_ROWS = 64


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """``[fn(x) for x in items]``, optionally spread over a thread pool."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def row_chunks(n: int, size: int = CHUNK_ROWS) -> List[slice]:
    """Fixed-size row slices covering ``range(n)``."""
    return [slice(start, min(start + size, n)) for start in range(0, n, size)]

