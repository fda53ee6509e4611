"""Order-preserving map over replicates, optionally in worker processes."""

from concurrent.futures import ProcessPoolExecutor


def map_replicates(fn, tasks, workers: int = 1):
    """``[fn(*t) for t in tasks]``; with ``workers > 1`` the calls run in a process pool.

    Results come back in task order whatever the scheduling, so merged outputs
    do not depend on the number of workers.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]
