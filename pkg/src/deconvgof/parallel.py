"""Deterministic fan-out of independent replicate tasks."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional

from .errors import ConfigError


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """Explicit ``jobs``, else ``$DECONV_JOBS``, else 1."""
    if jobs is None:
        env = os.environ.get("DECONV_JOBS")
        if env is None or env.strip() == "":
            return 1
        try:
            jobs = int(env)
        except ValueError:
            raise ConfigError(f"DECONV_JOBS must be an integer (got {env!r})") from None
    if jobs < 1:
        raise ConfigError("jobs must be ≥ 1")
    return int(jobs)


def run_indexed(fn: Callable, tasks: Iterable, jobs: Optional[int] = None) -> list:
    """``[fn(t) for t in tasks]``, possibly across processes.

    Results come back in task order whatever the completion order, so the
    reduction downstream never depends on scheduling. ``fn`` and the tasks
    must be picklable when ``jobs > 1``.
    """
    tasks = list(tasks)
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunksize = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunksize))
