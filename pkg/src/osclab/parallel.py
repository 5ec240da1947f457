"""Deterministic fan-out of independent realizations over processes.

Results are collected in task order regardless of scheduling, so any
worker count reproduces the single-process output bit for bit (each task
is a pure function of its arguments).
"""

from concurrent.futures import ProcessPoolExecutor


def map_ordered(fn, tasks, workers: int = 1) -> list:
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunksize))
