"""
Bounded worker pool for independent (model, parameter) points.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def run_points(
    func: Callable[[T], R],
    tasks: Iterable[T],
    workers: int = 1,
    sort_key: Optional[Callable[[R], float]] = None,
) -> List[R]:
    """
    Evaluate ``func`` on every task.

    Results come back in task order whatever the completion order, then
    optionally sorted by ``sort_key``. ``func`` and the tasks must be
    picklable when ``workers > 1``.

    Args:
        func: Module-level function of one task
        tasks: Work items
        workers: Pool size; 1 runs in-process
        sort_key: Optional key for the final deterministic sort
    """
    tasks = list(tasks)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    logger.info(f"Evaluating {len(tasks)} points with {workers} worker(s)")
    if workers == 1 or len(tasks) <= 1:
        results = [func(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as executor:
            results = list(executor.map(func, tasks))

    if sort_key is not None:
        results = sorted(results, key=sort_key)
    logger.info(f"Finished {len(results)} points")
    return results
