"""Ordered fan-out of independent Monte Carlo trials."""

from concurrent.futures import ProcessPoolExecutor


def run_trials(fn, args, jobs=1):
    """``[fn(a) for a in args]``, optionally across ``jobs`` processes.

    Results come back in argument order, so reductions are identical for
    every worker count.
    """
    args = list(args)
    if jobs is None or jobs <= 1 or len(args) < 2:
        return [fn(a) for a in args]
    chunk = max(1, len(args) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args, chunksize=chunk))
