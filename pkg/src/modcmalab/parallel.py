"""Order-preserving parallel evaluation of independent runs.

Results are merged by submission order, so the number of workers never
changes downstream decisions (racing, reports) or output bytes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def pmap(fn, items, jobs: int = 1, on_error=None):
    """Apply ``fn(*item)`` to every item, optionally in worker processes.

    ``fn`` must be picklable (module-level function or partial) when
    jobs > 1.  A raised exception becomes ``on_error`` when given,
    otherwise propagates.
    """
    items = list(items)
    if jobs <= 1:
        out = []
        for item in items:
            try:
                out.append(fn(*item))
            except Exception:
                if on_error is None:
                    raise
                out.append(on_error)
        return out
    results = [None] * len(items)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *item) for item in items]
        for i, future in enumerate(futures):
            try:
                results[i] = future.result()
            except Exception:
                if on_error is None:
                    raise
                results[i] = on_error
    return results
