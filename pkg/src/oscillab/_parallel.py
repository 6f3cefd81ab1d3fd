import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    n = os.cpu_count() or 1
    cap = os.environ.get("OSCILLAB_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def chunked_map(fn, n_items, chunk):
    """Apply fn(start, stop) over [0, n_items) in chunks, preserving order.

    numpy releases the GIL inside the heavy kernels, so threads are enough.
    """
    bounds = [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]
    workers = worker_count()
    if workers == 1 or len(bounds) < 2:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda ab: fn(*ab), bounds))
