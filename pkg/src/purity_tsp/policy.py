"""Constructive policy: linear candidate features with a softmax over
unvisited vertices, plus exact log-probability gradients and rollouts.

Scores use the negative-logit convention score = -(w . f), so positive
weights penalize large feature values; with w = (1, 0, 0, 0) the greedy
rollout is exactly the nearest-neighbor construction.

Features per candidate c from current vertex v:
  distance        Euclidean d(v, c) at unit-square scale
  log1p_purity    log(1 + purity order of edge (v, c))
  distance_rank   c's rank by distance among unvisited, scaled to [0, 1]
  unvisited_frac  fraction of vertices still unvisited
"""

import json
from dataclasses import dataclass

import numpy as np

from .geometry import Instance, all_pairs_purity
from .purity import ConstructionState
from .solvers import Tour

FEATURE_NAMES = ("distance", "log1p_purity", "distance_rank", "unvisited_frac")
FEATURE_COUNT = len(FEATURE_NAMES)


@dataclass(frozen=True)
class PolicyParams:
    """Weight vector of the feature softmax policy."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (FEATURE_COUNT,) or not np.isfinite(w).all():
            raise ValueError(f"weights must be {FEATURE_COUNT} finite reals")
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls) -> "PolicyParams":
        return cls(np.zeros(FEATURE_COUNT))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.weights))

    def to_json(self) -> str:
        return json.dumps({"weights": [float(w) for w in self.weights]})

    @classmethod
    def from_json(cls, text: str) -> "PolicyParams":
        return cls(np.asarray(json.loads(text)["weights"], dtype=np.float64))


def _features(pts: np.ndarray, purity_row: np.ndarray, cur: int,
              cands: np.ndarray, n: int) -> np.ndarray:
    diff = pts[cands] - pts[cur]
    d = np.hypot(diff[:, 0], diff[:, 1])
    q = np.log1p(purity_row[cands])
    m = len(cands)
    rank = np.empty(m)
    rank[np.argsort(d, kind="stable")] = np.arange(m)
    rank /= max(1, m - 1)
    u = np.full(m, m / n)
    return np.column_stack([d, q, rank, u])


def _softmax_neg(feats: np.ndarray, weights: np.ndarray) -> np.ndarray:
    logits = -(feats @ weights)
    logits -= logits.max()
    p = np.exp(logits)
    return p / p.sum()


def _state_step(inst: Instance, state: ConstructionState, params: PolicyParams,
                purity: np.ndarray | None):
    if not state.unvisited:
        raise RuntimeError("no unvisited candidates left")
    if not state.visited:
        raise ValueError("state has no current vertex")
    cands = np.fromiter(sorted(state.unvisited), dtype=np.int64)
    cur = state.visited[-1]
    K = all_pairs_purity(inst) if purity is None else purity
    feats = _features(inst.points, K[cur], cur, cands, inst.n)
    return cands, feats, _softmax_neg(feats, params.weights)


def action_distribution(inst: Instance, state: ConstructionState, params: PolicyParams,
                        purity: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Candidates (ascending index) and their selection probabilities."""
    cands, _, probs = _state_step(inst, state, params, purity)
    return cands, probs


def grad_log_prob(inst: Instance, state: ConstructionState, params: PolicyParams,
                  chosen: int, purity: np.ndarray | None = None) -> np.ndarray:
    """d/dw of log p(chosen): -f(chosen) + sum_c p(c) f(c)."""
    cands, feats, probs = _state_step(inst, state, params, purity)
    where = np.flatnonzero(cands == chosen)
    if len(where) == 0:
        raise ValueError(f"vertex {chosen} is not an unvisited candidate")
    return -feats[int(where[0])] + probs @ feats


@dataclass(frozen=True)
class RolloutResult:
    """A complete constructed tour with everything needed to assemble
    policy gradients without re-simulation.

    log_probs[t] and step_grads[t] belong to the decision that chose
    tour position t (entry 0 covers the start-vertex rule, which has no
    weight gradient).  states, when recorded, holds the pre-decision
    state for positions 1..N-1.
    """

    tour: Tour
    log_probs: np.ndarray
    step_grads: np.ndarray
    states: list[ConstructionState] | None

    def trace_dict(self) -> dict:
        """JSON-ready debugging export of the construction trace."""
        return {"order": [int(v) for v in self.tour.order],
                "length": self.tour.length,
                "log_probs": [float(v) for v in self.log_probs],
                "step_grads": [[float(g) for g in row] for row in self.step_grads]}


def rollout(inst: Instance, params: PolicyParams, mode: str, seed: int | None = None,
            purity: np.ndarray | None = None, first_vertex: int | str = 0,
            want_states: bool = False, want_grads: bool = True) -> RolloutResult:
    """Construct a complete tour under the policy.

    mode "sample" draws each step from the action distribution using a
    PCG64 stream seeded by `seed`; mode "greedy" takes the argmax with
    ties to the lowest index.  first_vertex is a fixed index or
    "random" (drawn from the same stream before the step uniforms).
    want_grads=False skips gradient bookkeeping (baseline and
    evaluation rollouts only need the tour).

    The unvisited-fraction feature is identical for every candidate at
    a given step, so it shifts all logits equally: it is omitted from
    the softmax (same distribution) and its gradient component is
    exactly zero.
    """
    if mode not in ("sample", "greedy"):
        raise ValueError(f"unknown rollout mode {mode!r}")
    n = inst.n
    if n < 3:
        raise ValueError("rollout needs at least 3 vertices")
    K = all_pairs_purity(inst) if purity is None else purity
    rng = None
    if mode == "sample" or first_vertex == "random":
        if seed is None:
            raise ValueError("a seed is required for stochastic rollouts")
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x2011]))

    log_probs = np.zeros(n)
    step_grads = np.zeros((n, FEATURE_COUNT))
    states: list[ConstructionState] | None = [] if want_states else None

    if first_vertex == "random":
        start = int(rng.integers(n))
        log_probs[0] = -np.log(n)
    else:
        start = int(first_vertex)
        if not 0 <= start < n:
            raise ValueError("first vertex out of range")
    uniforms = rng.random(n) if mode == "sample" else None

    pts = inst.points
    # Full lookup tables are cheap up to a few thousand vertices; beyond
    # that fall back to per-step rows to keep memory linear.
    tables = n <= 2048
    if tables:
        diff = pts[:, None, :] - pts[None, :, :]
        D = np.hypot(diff[..., 0], diff[..., 1])
        Q = np.log1p(K)
    w0, w1, w2 = params.weights[0], params.weights[1], params.weights[2]
    arange_n = np.arange(n, dtype=np.float64)

    visited_mask = np.zeros(n, dtype=bool)
    visited_mask[start] = True
    order = np.empty(n, dtype=np.int64)
    order[0] = start
    cur = start
    for t in range(1, n):
        cands = np.flatnonzero(~visited_mask)
        m = len(cands)
        if tables:
            d = D[cur, cands]
            q = Q[cur, cands]
        else:
            step = pts[cands] - pts[cur]
            d = np.hypot(step[:, 0], step[:, 1])
            q = np.log1p(K[cur, cands])
        r = np.empty(m)
        r[np.argsort(d, kind="stable")] = arange_n[:m]
        if m > 1:
            r /= m - 1
        scores = w0 * d + w1 * q + w2 * r
        shifted = scores.min() - scores
        p = np.exp(shifted)
        p /= p.sum()
        if states is not None:
            states.append(ConstructionState(
                [int(v) for v in order[:t]],
                set(int(c) for c in cands)))
        if mode == "greedy":
            pick = int(np.argmin(scores))
        else:
            pick = min(int(np.searchsorted(np.cumsum(p), uniforms[t], side="right")), m - 1)
        log_probs[t] = float(np.log(p[pick]))
        if want_grads:
            step_grads[t, 0] = p @ d - d[pick]
            step_grads[t, 1] = p @ q - q[pick]
            step_grads[t, 2] = p @ r - r[pick]
        cur = int(cands[pick])
        order[t] = cur
        visited_mask[cur] = True
    return RolloutResult(Tour.from_order(inst, order), log_probs, step_grads, states)
