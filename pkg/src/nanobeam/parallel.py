"""Thread-count policy for the embarrassingly parallel scans."""

from __future__ import annotations

import os


def max_workers(n_tasks: int) -> int:
    """Worker count for n_tasks independent jobs, capped by the
    NANOBEAM_THREADS environment variable when set."""
    cap = os.cpu_count() or 1
    env = os.environ.get("NANOBEAM_THREADS")
    if env:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            pass
    return max(1, min(cap, n_tasks))
