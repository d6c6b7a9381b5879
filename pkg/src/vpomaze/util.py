"""Small shared helpers."""

from concurrent.futures import ThreadPoolExecutor

__all__ = ["ordered_map"]


def ordered_map(fn, items, threads: int = 1) -> list:
    """Map fn over items, results in input order.

    With threads > 1 the work runs on a thread pool; results still come
    back in input order, so downstream reductions are schedule-independent.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
