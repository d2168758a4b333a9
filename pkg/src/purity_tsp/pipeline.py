"""End-to-end statistics pipeline: generate instances, solve them with
the near-optimal local search, pool per-edge purity orders per cell, and
fit the decay law.

Per-instance work is independent; with workers > 1 it fans out over a
process pool.  Pools merge commutatively and results are accumulated in
submission order, so the outcome is identical either way.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .generators import GenSpec, derive_seed, generate
from .geometry import edge_purity_orders
from .solvers import local_search_solve
from .stats import OrderHistogramPool, PurityLawReport, purity_law_report


def solve_instance_orders(spec: GenSpec, restarts: int, solve_seed: int) -> np.ndarray:
    """Generate, solve near-optimally, and return the tour's edge purity orders."""
    inst = generate(spec)
    tour = local_search_solve(inst, restarts=restarts, seed=solve_seed)
    return edge_purity_orders(inst, tour.order, np.roll(tour.order, -1))


def _task(args) -> tuple[int, str, np.ndarray]:
    spec, restarts, solve_seed = args
    return spec.n, spec.distribution, solve_instance_orders(spec, restarts, solve_seed)


def run_purity_pipeline(suite: dict[tuple[int, str], list[GenSpec]], restarts: int,
                        seed: int, workers: int = 1,
                        ) -> tuple[dict[tuple[int, str], OrderHistogramPool], PurityLawReport]:
    """Pools and fitted report for every (scale, distribution) cell."""
    tasks = [(spec, restarts, derive_seed(seed, spec.n, spec.distribution, spec.seed))
             for specs in suite.values() for spec in specs]
    pools: dict[tuple[int, str], OrderHistogramPool] = {cell: OrderHistogramPool()
                                                        for cell in suite}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for n, dist, orders in pool.map(_task, tasks, chunksize=8):
                pools[(n, dist)].add_orders(orders)
    else:
        for task in tasks:
            n, dist, orders = _task(task)
            pools[(n, dist)].add_orders(orders)
    return pools, purity_law_report(pools)
