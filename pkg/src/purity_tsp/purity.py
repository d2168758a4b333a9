"""Purity availability, per-step purity costs, discounted weightings,
tour-level purity profiles, and the incremental availability tracker.

Conventions (used consistently everywhere):

* Purity orders inside the availability are always taken over the full
  instance vertex set: visited vertices keep counting as coverers, so
  the pairwise order matrix is fixed for the whole construction.
* The availability of the empty set and of singletons is 0, which keeps
  the closing construction steps and the telescoping cost sum finite.
* Cost indexing: for a tour written t = 1..N, costs[t-1] is the cost of
  the step taken with t vertices already visited (new edge order plus
  availability change), and costs[N-1] is the closing edge's order.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import (Instance, all_pairs_purity, edge_purity_orders, purity_order,
                       purity_rows, sorted_partners)
from .solvers import Tour, _check_permutation


@dataclass
class ConstructionState:
    """Partial tour: visited prefix (in order) and the unvisited rest."""

    visited: list[int]
    unvisited: set[int]

    @classmethod
    def initial(cls, inst: Instance, first: int = 0) -> "ConstructionState":
        if not 0 <= first < inst.n:
            raise ValueError("first vertex out of range")
        rest = set(range(inst.n))
        rest.discard(first)
        return cls([first], rest)

    @property
    def t(self) -> int:
        return len(self.visited)

    def advance(self, nxt: int) -> None:
        if nxt not in self.unvisited:
            raise ValueError(f"vertex {nxt} is not unvisited")
        self.visited.append(nxt)
        self.unvisited.discard(nxt)


def purity_availability(inst: Instance, subset, purity: np.ndarray | None = None) -> float:
    """Mean over the subset of each vertex's minimum purity order to any
    other subset vertex; 0 for empty or singleton subsets.

    Pass a precomputed all-pairs matrix via `purity` to skip recomputing
    pairwise orders.
    """
    members = np.fromiter(subset, dtype=np.int64) if not isinstance(subset, np.ndarray) else subset.astype(np.int64)
    if len(members) != len(set(members.tolist())):
        raise ValueError("subset contains repeated vertices")
    if len(members) and (members.min() < 0 or members.max() >= inst.n):
        raise ValueError("subset contains invalid vertex indices")
    if len(members) <= 1:
        return 0.0
    if purity is not None:
        sub = purity[np.ix_(members, members)].astype(np.float64)
    else:
        sub = purity_rows(inst, members, members).astype(np.float64)
    np.fill_diagonal(sub, np.inf)
    return float(sub.min(axis=1).mean())


def purity_cost(inst: Instance, state: ConstructionState, nxt: int,
                purity: np.ndarray | None = None) -> float:
    """Cost of selecting `nxt` from the given state.

    Mid-construction this is the new edge's purity order plus the change
    in availability of the unvisited set; once every vertex is visited
    the only legal `nxt` is the tour's first vertex and the cost is the
    closing edge's order.
    """
    if not state.visited:
        raise ValueError("state has no visited prefix")
    last = state.visited[-1]
    if not state.unvisited:
        if nxt != state.visited[0]:
            raise ValueError("construction is complete; only the closing edge remains")
        return float(_edge_order(inst, last, nxt, purity))
    if nxt not in state.unvisited:
        raise ValueError(f"vertex {nxt} was already visited")
    before = purity_availability(inst, state.unvisited, purity)
    after = purity_availability(inst, state.unvisited - {nxt}, purity)
    return float(_edge_order(inst, last, nxt, purity)) + after - before


def _edge_order(inst: Instance, i: int, j: int, purity: np.ndarray | None) -> int:
    return int(purity[i, j]) if purity is not None else purity_order(inst, i, j)


def purity_weights(costs, delta: float) -> np.ndarray:
    """Discounted-future weightings W_t = 1 + sum_{j>=t} delta^(j-t) C_j,
    computed by the backward recurrence W_t = 1 + C_t + delta*(W_{t+1} - 1)."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("discount must lie in [0, 1]")
    costs = np.asarray(costs, dtype=np.float64)
    n = len(costs)
    if n == 0:
        raise ValueError("costs must be nonempty")
    weights = np.empty(n)
    weights[-1] = 1.0 + costs[-1]
    for t in range(n - 2, -1, -1):
        weights[t] = 1.0 + costs[t] + delta * (weights[t + 1] - 1.0)
    return weights


@dataclass(frozen=True)
class PurityTrace:
    """Per-step purity costs and weightings of one complete tour."""

    costs: np.ndarray
    weights: np.ndarray
    discount: float


def purity_trace(inst: Instance, order, delta: float,
                 purity: np.ndarray | None = None,
                 partners: np.ndarray | None = None) -> PurityTrace:
    """Costs and weightings along a complete tour (tracker-accelerated)."""
    order = _check_permutation(np.asarray(order, dtype=np.int64), inst.n)
    n = inst.n
    K = all_pairs_purity(inst) if purity is None else purity
    tracker = AvailabilityTracker(inst, purity=K, partners=partners)
    costs = np.empty(n)
    tracker.remove(int(order[0]))
    phi_prev = tracker.phi          # phi(U_1)
    for t in range(1, n):
        v = int(order[t])
        tracker.remove(v)
        phi_cur = tracker.phi       # phi(U_{t+1})
        costs[t - 1] = K[order[t - 1], v] + phi_cur - phi_prev
        phi_prev = phi_cur
    costs[n - 1] = K[order[n - 1], order[0]]
    return PurityTrace(costs, purity_weights(costs, delta), delta)


@dataclass(frozen=True)
class PurityProfile:
    """Histogram of a tour's edge purity orders plus derived metrics."""

    histogram: np.ndarray
    prop0: float
    apo_all: float
    apo_non0: float

    @property
    def n_edges(self) -> int:
        return int(self.histogram.sum())

    @classmethod
    def from_orders(cls, orders: np.ndarray, max_order: int) -> "PurityProfile":
        hist = np.bincount(orders, minlength=max_order + 1).astype(np.int64)
        n = len(orders)
        ks = np.arange(len(hist))
        non0 = hist[1:].sum()
        return cls(
            histogram=hist,
            prop0=float(hist[0]) / n,
            apo_all=float((ks * hist).sum()) / n,
            apo_non0=float((ks[1:] * hist[1:]).sum() / non0) if non0 else 0.0,
        )

    def csv_row(self, n: int, distribution: str) -> str:
        return f"{n},{distribution},{self.prop0:.6f},{self.apo_all:.6f},{self.apo_non0:.6f}"


def purity_profile(inst: Instance, tour: Tour | np.ndarray) -> PurityProfile:
    """Purity profile over the N cycle edges of a complete tour."""
    order = tour.order if isinstance(tour, Tour) else np.asarray(tour, dtype=np.int64)
    order = _check_permutation(order, inst.n)
    if inst.n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    orders = edge_purity_orders(inst, order, np.roll(order, -1))
    return PurityProfile.from_orders(orders, max_order=inst.n - 2)


class AvailabilityTracker:
    """Incremental purity availability under vertex removals.

    Keeps, per surviving vertex, a cursor into its purity-sorted partner
    list (valid because pairwise orders are fixed over the full
    instance) plus reverse pointee lists, so each removal costs time
    proportional to the cursors it actually advances.
    """

    def __init__(self, inst: Instance, purity: np.ndarray | None = None,
                 partners: np.ndarray | None = None):
        K = all_pairs_purity(inst) if purity is None else purity
        self._partners = sorted_partners(inst, K) if partners is None else partners
        n = inst.n
        self._min_order = np.take_along_axis(K, self._partners, axis=1)
        self._cursor = np.zeros(n, dtype=np.int64)
        self._alive = np.ones(n, dtype=bool)
        self._alive_count = n
        self._sum = float(self._min_order[:, 0].sum())
        self._pointees: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            self._pointees[self._partners[i, 0]].append(i)

    @property
    def alive_count(self) -> int:
        return self._alive_count

    @property
    def phi(self) -> float:
        if self._alive_count <= 1:
            return 0.0
        return self._sum / self._alive_count

    def alive_vertices(self) -> np.ndarray:
        return np.flatnonzero(self._alive)

    def remove(self, v: int) -> None:
        if not self._alive[v]:
            raise RuntimeError(f"vertex {v} was already removed")
        self._alive[v] = False
        self._alive_count -= 1
        if self._cursor[v] < self._partners.shape[1]:
            self._sum -= float(self._min_order[v, self._cursor[v]])
        for i in self._pointees[v]:
            if not self._alive[i]:
                continue
            cur = self._cursor[i]
            self._sum -= float(self._min_order[i, cur])
            cur += 1
            while cur < self._partners.shape[1] and not self._alive[self._partners[i, cur]]:
                cur += 1
            self._cursor[i] = cur
            if cur < self._partners.shape[1]:
                self._sum += float(self._min_order[i, cur])
                self._pointees[self._partners[i, cur]].append(i)
        self._pointees[v] = []


@dataclass(frozen=True)
class SupermodularityViolation:
    """One counterexample to the availability supermodularity inequality."""

    small: tuple[int, ...]
    large: tuple[int, ...]
    extra: int
    gain_small: float
    gain_large: float

    @property
    def excess(self) -> float:
        return self.gain_small - self.gain_large


def supermodularity_violations(inst: Instance, n_triples: int, seed: int,
                               slack: float = 1e-9,
                               purity: np.ndarray | None = None) -> list[SupermodularityViolation]:
    """Sample random nested-subset triples and collect counterexamples to
    gain(small) <= gain(large) + slack, where gain(S) = phi(S + x) - phi(S).

    Sampled small sets always have at least 2 vertices so the
    availability is nondegenerate on every set involved.
    """
    n = inst.n
    if n < 4:
        raise ValueError("need at least 4 vertices to form a nontrivial triple")
    K = all_pairs_purity(inst) if purity is None else purity
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x51e]))
    out: list[SupermodularityViolation] = []
    for _ in range(n_triples):
        x = int(rng.integers(n))
        rest = np.array([v for v in range(n) if v != x])
        b_size = int(rng.integers(2, len(rest) + 1))
        large = rng.choice(rest, size=b_size, replace=False)
        a_size = int(rng.integers(2, b_size + 1))
        small = rng.choice(large, size=a_size, replace=False)
        gain_small = (purity_availability(inst, np.append(small, x), K)
                      - purity_availability(inst, small, K))
        gain_large = (purity_availability(inst, np.append(large, x), K)
                      - purity_availability(inst, large, K))
        if gain_small > gain_large + slack:
            out.append(SupermodularityViolation(
                tuple(sorted(int(v) for v in small)),
                tuple(sorted(int(v) for v in large)),
                x, float(gain_small), float(gain_large)))
    return out


def falsification_report(name: str, violations: list[SupermodularityViolation],
                         trials: int, context: str) -> str:
    """Human-readable report naming a falsified property."""
    lines = [f"FALSIFICATION REPORT: {name}",
             f"context: {context}",
             f"violations: {len(violations)} of {trials} sampled triples"]
    for v in violations[:10]:
        lines.append(f"  small={v.small} large={v.large} extra={v.extra} "
                     f"gain_small={v.gain_small:.6f} gain_large={v.gain_large:.6f} "
                     f"excess={v.excess:.6f}")
    if len(violations) > 10:
        lines.append(f"  ... {len(violations) - 10} more")
    return "\n".join(lines)
