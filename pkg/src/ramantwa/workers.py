"""Worker-pool sizing for the trajectory integrator.

The thread cap must be raised via NUMBA_NUM_THREADS before numba is first
imported, so every module that imports the compiled kernel goes through
`ensure_thread_cap` first.  Results are independent of the worker count by
construction (each trajectory writes to its own output slot), so any
worker count up to the cap is valid, including counts above the physical
core count.
"""

from __future__ import annotations

import os

_ENV_WORKERS = "RAMANTWA_WORKERS"
_CAP = 16


def ensure_thread_cap() -> None:
    if "numba" not in globals():
        cap = max(_CAP, os.cpu_count() or 1)
        os.environ.setdefault("NUMBA_NUM_THREADS", str(cap))
        # skip the TBB probe; the portable workqueue layer is all we need
        os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")


def default_workers() -> int:
    env = os.environ.get(_ENV_WORKERS)
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


def set_workers(n: int) -> int:
    """Pin the integration thread count; returns the count actually set."""
    ensure_thread_cap()
    import numba

    cap = int(os.environ.get("NUMBA_NUM_THREADS", "1"))
    n = max(1, min(int(n), cap))
    numba.set_num_threads(n)
    return n
