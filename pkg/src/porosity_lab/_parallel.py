"""Order-preserving parallel map capped by ``POROSITY_LAB_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "POROSITY_LAB_THREADS"


def thread_count():
    raw = os.environ.get(ENV_VAR, "1").strip() or "1"
    n = int(raw)
    if n < 0:
        raise ValueError(f"{ENV_VAR} must be >= 0")
    if n == 0:
        return os.cpu_count() or 1
    return n


def ordered_map(fn, items):
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
