"""Empirical verifiers for the structural guarantees of 0-order pure edges:
every vertex has one, they form a connected subgraph, and each vertex's
0-order neighborhood is convex in angular order.

These properties are theorems, so the fuzz suite treats any failure as a
bug (or a falsification worth surfacing), never as tolerable noise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .generators import GenSpec, generate
from .geometry import Instance, all_pairs_purity, purity_order

_COLLINEAR_TOL = 1e-12


def check_existence(inst: Instance, purity: np.ndarray | None = None) -> tuple[bool, dict[int, int]]:
    """Every vertex must have a 0-order partner; the nearest neighbor is
    the witness candidate and is validated explicitly."""
    pts = inst.points
    n = inst.n
    witnesses: dict[int, int] = {}
    ok = True
    for v in range(n):
        diff = pts - pts[v]
        d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
        d2[v] = np.inf
        nn = int(np.argmin(d2))
        witnesses[v] = nn
        if purity_order(inst, v, nn) != 0:
            K = all_pairs_purity(inst) if purity is None else purity
            row = K[v].copy()
            row[v] = np.iinfo(np.int64).max
            if row.min() != 0:
                ok = False
    return ok, witnesses


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def check_connectivity(inst: Instance, purity: np.ndarray | None = None) -> bool:
    """Whether the subgraph of all 0-order pure edges is connected."""
    K = all_pairs_purity(inst) if purity is None else purity
    n = inst.n
    uf = _UnionFind(n)
    heads, tails = np.nonzero(np.triu(K == 0, k=1))
    for a, b in zip(heads.tolist(), tails.tolist()):
        uf.union(a, b)
    root = uf.find(0)
    return all(uf.find(v) == root for v in range(n))


def check_convexity(inst: Instance, v: int, purity: np.ndarray | None = None) -> bool:
    """Whether the polygon of v's 0-order neighbors, taken in angular
    order around v, is convex (collinear runs permitted)."""
    if not 0 <= v < inst.n:
        raise ValueError("vertex out of range")
    K = all_pairs_purity(inst) if purity is None else purity
    row = K[v].copy()
    row[v] = 1
    nbrs = np.flatnonzero(row == 0)
    if len(nbrs) < 3:
        return True
    pts = inst.points
    rel = pts[nbrs] - pts[v]
    angles = np.arctan2(rel[:, 1], rel[:, 0])
    radii = np.hypot(rel[:, 0], rel[:, 1])
    ordering = np.lexsort((radii, angles))
    poly = pts[nbrs[ordering]]
    m = len(poly)
    sign = 0
    for a in range(m):
        p0, p1, p2 = poly[a], poly[(a + 1) % m], poly[(a + 2) % m]
        cross = (p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0])
        if abs(cross) <= _COLLINEAR_TOL:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


@dataclass
class TopologySuiteResult:
    instances: int
    existence_failures: int
    connectivity_failures: int
    convexity_failures: int
    failing_seeds: list[int]

    @property
    def all_passed(self) -> bool:
        return not (self.existence_failures or self.connectivity_failures
                    or self.convexity_failures)

    def to_dict(self) -> dict:
        return {"instances": self.instances,
                "existence_failures": self.existence_failures,
                "connectivity_failures": self.connectivity_failures,
                "convexity_failures": self.convexity_failures,
                "all_passed": self.all_passed,
                "failing_seeds": self.failing_seeds}


def run_topology_suite(n_instances: int, n_min: int, n_max: int, seed: int,
                       distribution: str = "uniform") -> TopologySuiteResult:
    """Fuzz all three checks over seeded instances with N in [n_min, n_max].

    Uniform sampling has no duplicate points (probability zero), which
    keeps the angular ordering in the convexity check well defined.
    """
    if n_min < 2 or n_max < n_min:
        raise ValueError("need 2 <= n_min <= n_max")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x709]))
    res = TopologySuiteResult(n_instances, 0, 0, 0, [])
    for k in range(n_instances):
        n = int(rng.integers(n_min, n_max + 1))
        inst_seed = int(rng.integers(2 ** 62))
        inst = generate(GenSpec(distribution, n, inst_seed))
        K = all_pairs_purity(inst)
        ok_e, _ = check_existence(inst, K)
        ok_c = check_connectivity(inst, K)
        ok_v = all(check_convexity(inst, v, K) for v in range(n))
        if not ok_e:
            res.existence_failures += 1
        if not ok_c:
            res.connectivity_failures += 1
        if not ok_v:
            res.convexity_failures += 1
        if not (ok_e and ok_c and ok_v):
            res.failing_seeds.append(inst_seed)
    return res
