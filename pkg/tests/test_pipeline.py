import numpy as np

from purity_tsp.generators import generate_suite
from purity_tsp.pipeline import run_purity_pipeline, solve_instance_orders


def test_parallel_matches_sequential():
    suite = generate_suite([10, 14], ["uniform", "explosion"], 4, base_seed=3)
    pools_seq, report_seq = run_purity_pipeline(suite, restarts=3, seed=1, workers=1)
    pools_par, report_par = run_purity_pipeline(suite, restarts=3, seed=1, workers=2)
    for cell in suite:
        a, b = pools_seq[cell], pools_par[cell]
        assert a.to_dict() == b.to_dict()
        assert a.n_edges == b.n_edges
    assert report_seq.to_csv() == report_par.to_csv()


def test_solve_instance_orders_deterministic():
    suite = generate_suite([12], ["implosion"], 1, base_seed=9)
    spec = suite[(12, "implosion")][0]
    a = solve_instance_orders(spec, restarts=3, solve_seed=5)
    b = solve_instance_orders(spec, restarts=3, solve_seed=5)
    assert np.array_equal(a, b)
    assert len(a) == 12
