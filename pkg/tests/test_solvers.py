import itertools
import math

import numpy as np
import pytest

from purity_tsp.errors import CapacityError
from purity_tsp.generators import GenSpec, generate
from purity_tsp.geometry import Instance
from purity_tsp.solvers import (Tour, held_karp, local_search_solve, nearest_neighbor,
                                tour_length, two_opt_optimal)

from conftest import circle_instance, cycle_lengths_equal


def brute_force_optimum(inst: Instance) -> float:
    best = math.inf
    for perm in itertools.permutations(range(1, inst.n)):
        best = min(best, tour_length(inst, np.array((0,) + perm)))
    return best


class TestTourLength:
    def test_unit_square(self):
        inst = Instance(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        assert tour_length(inst, [0, 1, 2, 3]) == 4.0

    def test_three_point_permutations_equal(self):
        inst = generate(GenSpec("uniform", 3, 5))
        lengths = {tour_length(inst, np.array(p)) for p in itertools.permutations(range(3))}
        assert len(lengths) == 1

    def test_matches_independent_summation(self):
        inst = generate(GenSpec("uniform", 8, 21))
        order = np.random.default_rng(0).permutation(8)
        expected = math.fsum(
            math.dist(inst.points[order[k]], inst.points[order[(k + 1) % 8]])
            for k in range(8))
        assert tour_length(inst, order) == pytest.approx(expected, abs=1e-12)

    def test_rotation_and_reversal_exact(self):
        inst = generate(GenSpec("uniform", 30, 3))
        order = np.random.default_rng(1).permutation(30)
        base = tour_length(inst, order)
        assert tour_length(inst, np.roll(order, 7)) == base
        assert tour_length(inst, order[::-1]) == base

    def test_rejects_non_permutation(self):
        inst = generate(GenSpec("uniform", 5, 1))
        with pytest.raises(ValueError):
            tour_length(inst, [0, 1, 2, 3, 3])
        with pytest.raises(ValueError):
            tour_length(inst, [0, 1, 2])


class TestHeldKarp:
    def test_triangle_is_perimeter(self):
        inst = generate(GenSpec("uniform", 3, 2))
        assert held_karp(inst).length == pytest.approx(tour_length(inst, [0, 1, 2]), abs=1e-12)

    def test_square_corners(self):
        inst = Instance(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        assert held_karp(inst).length == pytest.approx(4.0, abs=1e-12)

    def test_two_points(self):
        inst = Instance(np.array([[0.0, 0.0], [0.0, 1.0]]))
        assert held_karp(inst).length == pytest.approx(2.0, abs=1e-12)

    def test_matches_bruteforce_n9(self):
        inst = generate(GenSpec("uniform", 9, 77))
        assert held_karp(inst).length == pytest.approx(brute_force_optimum(inst), abs=1e-12)

    def test_capacity_error(self):
        inst = generate(GenSpec("uniform", 20, 0))
        with pytest.raises(CapacityError):
            held_karp(inst)

    def test_returns_valid_tour(self):
        inst = generate(GenSpec("uniform", 11, 13))
        tour = held_karp(inst)
        assert sorted(tour.order.tolist()) == list(range(11))
        assert tour.length == pytest.approx(tour_length(inst, tour.order), abs=1e-12)


class TestNearestNeighbor:
    def test_two_points(self):
        inst = Instance(np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert nearest_neighbor(inst, 0).order.tolist() == [0, 1]

    def test_collinear_left_to_right(self, collinear3):
        assert nearest_neighbor(collinear3, 0).order.tolist() == [0, 1, 2]

    def test_matches_independent_greedy(self):
        inst = generate(GenSpec("uniform", 12, 19))
        pts = inst.points
        for start in range(12):
            order = [start]
            left = set(range(12)) - {start}
            while left:
                cur = order[-1]
                nxt = min(left, key=lambda j: (math.dist(pts[cur], pts[j]), j))
                order.append(nxt)
                left.discard(nxt)
            assert nearest_neighbor(inst, start).order.tolist() == order

    def test_invalid_start(self, uniform12):
        with pytest.raises(ValueError):
            nearest_neighbor(uniform12, 12)


class TestLocalSearch:
    def test_convex_position_returns_hull(self):
        inst = circle_instance(14)
        tour = local_search_solve(inst, restarts=3, seed=0)
        assert cycle_lengths_equal(tour.order.tolist(), list(range(14)))

    def test_restart_monotonicity(self):
        inst = generate(GenSpec("uniform", 100, 31))
        one = local_search_solve(inst, restarts=1, seed=4)
        twenty = local_search_solve(inst, restarts=20, seed=4)
        assert twenty.length <= one.length + 1e-12

    def test_near_optimal_small(self):
        hits = 0
        for seed in range(100):
            inst = generate(GenSpec("uniform", 5 + seed % 5, seed))
            approx = local_search_solve(inst, restarts=10, seed=seed)
            exact = held_karp(inst)
            assert approx.length >= exact.length - 1e-9
            if approx.length <= exact.length * 1.005:
                hits += 1
        assert hits >= 95

    def test_two_opt_postcondition(self):
        for seed in (0, 1, 2):
            inst = generate(GenSpec("uniform", 40, seed))
            tour = local_search_solve(inst, restarts=2, seed=seed)
            assert two_opt_optimal(inst, tour.order)

    def test_solver_chain(self):
        for seed in range(10):
            inst = generate(GenSpec("uniform", 10, 100 + seed))
            hk = held_karp(inst).length
            ls = local_search_solve(inst, restarts=5, seed=seed).length
            nn = nearest_neighbor(inst, 0).length
            assert hk <= ls + 1e-9
            assert ls <= nn + 1e-9

    def test_determinism(self):
        inst = generate(GenSpec("explosion", 60, 8))
        a = local_search_solve(inst, restarts=5, seed=3)
        b = local_search_solve(inst, restarts=5, seed=3)
        assert a.order.tolist() == b.order.tolist()

    def test_needs_three_vertices(self):
        inst = Instance(np.array([[0.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            local_search_solve(inst)


class TestTourSerialization:
    def test_json_roundtrip(self):
        inst = generate(GenSpec("uniform", 6, 1))
        tour = nearest_neighbor(inst, 2)
        back = Tour.from_json(tour.to_json())
        assert back.order.tolist() == tour.order.tolist()
        assert back.length == tour.length
