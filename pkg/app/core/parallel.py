"""
Parallel Runner
Index-ordered fan-out of independent tasks over a process pool, with one
reproducible random stream per task.
"""

from collections.abc import Callable, Sequence
from multiprocessing import Pool
from typing import Optional, TypeVar

import numpy as np

from app.core.logging import get_logger
from config import settings

logger = get_logger("harness")

T = TypeVar("T")
R = TypeVar("R")


def worker_count(limit: Optional[int] = None) -> int:
    """Workers allowed for a run, capped by OSC_THREADS."""
    cap = settings.OSC_THREADS
    return max(1, min(cap, limit) if limit is not None else cap)


def run_indexed(
    func: Callable[[T], R],
    tasks: Sequence[T],
    workers: Optional[int] = None,
) -> list[R]:
    """
    Apply ``func`` to every task and return results in task order.

    Runs inline when only one worker is allowed; ``func`` must be a module-level
    callable so the pool can pickle it.
    """
    count = worker_count(workers)
    if count == 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug("Parallel batch", context={"tasks": len(tasks), "workers": count})
    with Pool(min(count, len(tasks))) as pool:
        return pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * count)))


def task_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for task ``index`` of a run seeded with ``master_seed``."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))
