"""Tour constructors: exact bitmask DP, greedy, and 2-opt/Or-opt local search.

The local search is the near-optimal reference solver for the statistics
pipeline: nearest-neighbor construction from a random start, then
alternating best-improvement 2-opt and Or-opt (segment lengths 1-3)
phases until neither finds an improving move, best tour kept over
seeded restarts.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .geometry import Instance

_EPS = 1e-10  # improvement threshold; lengths live on the unit square


@dataclass(frozen=True)
class Tour:
    """A Hamiltonian cycle as a vertex permutation with cached length."""

    order: np.ndarray
    length: float

    @classmethod
    def from_order(cls, inst: Instance, order) -> "Tour":
        order = np.asarray(order, dtype=np.int64)
        return cls(order, tour_length(inst, order))

    def to_json(self) -> str:
        return json.dumps({"order": [int(v) for v in self.order], "length": self.length})

    @classmethod
    def from_json(cls, text: str) -> "Tour":
        obj = json.loads(text)
        return cls(np.asarray(obj["order"], dtype=np.int64), float(obj["length"]))


def _check_permutation(order: np.ndarray, n: int) -> np.ndarray:
    order = np.asarray(order, dtype=np.int64)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise ValueError("order is not a permutation of the instance vertices")
    return order


def tour_length(inst: Instance, order) -> float:
    """Cycle length: closing edge plus consecutive edges (Euclidean).

    Edge lengths are accumulated with fsum, so rotating or reversing the
    order (same edge multiset) gives the identical float.
    """
    order = _check_permutation(order, inst.n)
    pts = inst.points
    step = pts[order] - pts[np.roll(order, -1)]
    return math.fsum(np.hypot(step[:, 0], step[:, 1]))


def _dist_rows(pts: np.ndarray, idx: np.ndarray) -> np.ndarray:
    diff = pts[idx][:, None, :] - pts[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _pair_dist(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = pts[a] - pts[b]
    return np.hypot(diff[..., 0], diff[..., 1])


def nearest_neighbor(inst: Instance, start: int) -> Tour:
    """Greedy closest-unvisited construction; ties go to the lowest index."""
    n = inst.n
    if not 0 <= start < n:
        raise ValueError(f"start vertex {start} out of range for n={n}")
    pts = inst.points
    unvisited = np.ones(n, dtype=bool)
    unvisited[start] = False
    order = np.empty(n, dtype=np.int64)
    order[0] = start
    cur = start
    for t in range(1, n):
        d = _pair_dist(pts, np.full(n, cur), np.arange(n))
        d[~unvisited] = np.inf
        cur = int(np.argmin(d))
        order[t] = cur
        unvisited[cur] = False
    return Tour.from_order(inst, order)


def held_karp(inst: Instance, cap: int = 16) -> Tour:
    """Exact minimum tour by Held-Karp dynamic programming (N <= cap)."""
    n = inst.n
    if n > cap:
        raise CapacityError(f"held_karp supports up to {cap} vertices, got {n}")
    pts = inst.points
    if n == 2:
        return Tour.from_order(inst, np.array([0, 1]))
    D = _dist_rows(pts, np.arange(n))
    m = n - 1  # vertices 1..n-1, bit k <-> vertex k+1; tours start at 0
    full = (1 << m) - 1
    dp = np.full((1 << m, m), np.inf)
    parent = np.full((1 << m, m), -1, dtype=np.int8)
    for k in range(m):
        dp[1 << k, k] = D[0, k + 1]
    for mask in range(1, full + 1):
        bits = np.flatnonzero([(mask >> k) & 1 for k in range(m)])
        if len(bits) < 2:
            continue
        prev_masks = mask ^ (1 << bits)
        cost = dp[prev_masks][:, bits] + D[np.ix_(bits + 1, bits + 1)]
        best = np.argmin(cost, axis=1)
        dp[mask, bits] = cost[np.arange(len(bits)), best]
        parent[mask, bits] = bits[best]
    closing = dp[full] + D[1:, 0]
    last = int(np.argmin(closing))
    order = [0]
    mask, cur = full, last
    chain = []
    while cur >= 0:
        chain.append(cur + 1)
        nxt = int(parent[mask, cur])
        mask ^= 1 << cur
        cur = nxt
    order.extend(reversed(chain))
    return Tour.from_order(inst, np.array(order))


def _best_two_opt_move(pts: np.ndarray, order: np.ndarray, row_block: int):
    """Best 2-opt move as (delta, i, j) with delta < -eps, else None.

    The move reverses order[i:j+1], replacing edges (i-1,i) and (j,j+1)
    with (i-1,j) and (i,j+1); (i, j) = (0, n-1) is the whole-tour
    reversal and is skipped.
    """
    n = len(order)
    prev = np.roll(order, 1)
    nxt = np.roll(order, -1)
    edge = _pair_dist(pts, order, nxt)         # edge[t] = d(o[t], o[t+1])
    base1 = np.roll(edge, 1)                   # base1[i] = d(o[i-1], o[i])
    best = (-_EPS, -1, -1)
    cols = np.arange(n)
    for start in range(0, n, row_block):
        stop = min(start + row_block, n)
        rows = np.arange(start, stop)
        d1 = _dist_rows(pts, prev[start:stop])[:, order]   # d(o[i-1], o[j])
        d2 = _dist_rows(pts, order[start:stop])[:, nxt]    # d(o[i],   o[j+1])
        delta = d1 + d2 - base1[start:stop, None] - edge[None, :]
        delta[cols[None, :] <= rows[:, None]] = np.inf     # need i < j
        if start == 0:
            delta[0, n - 1] = np.inf                       # whole-tour reversal is a no-op
        k = int(np.argmin(delta))
        i, j = divmod(k, n)
        val = float(delta[i, j])
        i += start
        if val < best[0]:
            best = (val, i, j)
    return None if best[1] < 0 else best


def _best_or_opt_move(pts: np.ndarray, order: np.ndarray, row_block: int):
    """Best Or-opt move: relocate a segment of length 1-3 (either
    orientation) between another pair of consecutive vertices."""
    n = len(order)
    idx = np.arange(n)
    edge = _pair_dist(pts, order, np.roll(order, -1))
    best = (-_EPS, None)
    for seg_len in (1, 2, 3):
        if n < seg_len + 2:
            continue
        s0 = order                                  # segment head at position i
        sL = order[(idx + seg_len - 1) % n]         # segment tail
        p = order[(idx - 1) % n]
        q = order[(idx + seg_len) % n]
        removal = _pair_dist(pts, p, s0) + _pair_dist(pts, sL, q) - _pair_dist(pts, p, q)
        for start in range(0, n, row_block):
            stop = min(start + row_block, n)
            rows = np.arange(start, stop)
            a = order[start:stop]                   # insert between o[j], o[j+1]
            b = order[(rows + 1) % n]
            rows_a = _dist_rows(pts, a)
            rows_b = _dist_rows(pts, b)
            da_s0, da_sL = rows_a[:, s0], rows_a[:, sL]
            db_s0, db_sL = rows_b[:, s0], rows_b[:, sL]
            broken = edge[start:stop, None]
            rel = (rows[:, None] - idx[None, :]) % n
            invalid = (rel >= n - 1) | (rel <= seg_len - 1)
            for rev, head, tail in ((False, da_s0, db_sL), (True, da_sL, db_s0)):
                delta = head + tail - broken - removal[None, :]
                delta[invalid] = np.inf
                k = int(np.argmin(delta))
                jj, ii = divmod(k, n)
                val = float(delta[jj, ii])
                if val < best[0]:
                    best = (val, (seg_len, ii, int(rows[jj]), rev))
    return None if best[1] is None else best


def _apply_or_opt(order: np.ndarray, seg_len: int, i: int, j: int, rev: bool) -> np.ndarray:
    n = len(order)
    seg = [int(order[(i + t) % n]) for t in range(seg_len)]
    if rev:
        seg.reverse()
    rest = [int(order[(i + seg_len + t) % n]) for t in range(n - seg_len)]
    target = int(order[j])
    out = []
    for c in rest:
        out.append(c)
        if c == target:
            out.extend(seg)
    return np.asarray(out, dtype=np.int64)


def _refine(pts: np.ndarray, order: np.ndarray, row_block: int) -> np.ndarray:
    """Alternate 2-opt and Or-opt phases until neither improves.

    Always ends on a failed 2-opt scan, so the result carries the 2-opt
    local-optimality post-condition.
    """
    while True:
        improved = False
        while True:
            move = _best_two_opt_move(pts, order, row_block)
            if move is None:
                break
            _, i, j = move
            order = order.copy()
            order[i:j + 1] = order[i:j + 1][::-1]
            improved = True
        while True:
            move = _best_or_opt_move(pts, order, row_block)
            if move is None:
                break
            order = _apply_or_opt(order, *move[1])
            improved = True
        if not improved:
            return order


def two_opt_optimal(inst: Instance, order) -> bool:
    """True when no single 2-opt move improves the tour (exhaustive scan)."""
    order = _check_permutation(order, inst.n)
    return _best_two_opt_move(inst.points, order, _row_block(inst.n)) is None


def _row_block(n: int) -> int:
    return max(1, min(n, 4_000_000 // max(n, 1)))


def local_search_solve(inst: Instance, restarts: int = 10, seed: int = 0) -> Tour:
    """Best tour over seeded restarts of NN construction plus refinement.

    Deterministic in (instance, restarts, seed); ties between restarts
    keep the earliest one.
    """
    n = inst.n
    if n < 3:
        raise ValueError("local search needs at least 3 vertices")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    pts = inst.points
    block = _row_block(n)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x2077]))
    starts = rng.integers(n, size=restarts)
    best_order, best_len = None, np.inf
    for start in starts:
        order = _refine(pts, nearest_neighbor(inst, int(start)).order, block)
        length = tour_length(inst, order)
        if length < best_len - _EPS:
            best_order, best_len = order, length
    return Tour(best_order, best_len)
