"""Instances on the unit square and purity orders of edges.

The purity order of an edge (i, j) counts the vertices lying strictly
inside the circle whose diameter is the edge: a vertex x is counted when
(x_i - x) . (x_j - x) < 0.  Points exactly on the circle (zero dot
product) are not counted, so the endpoints themselves never contribute.

All code paths that classify a vertex evaluate the dot product with the
same elementwise numpy operations, so the brute-force path, the
grid-accelerated path and the all-pairs matrix agree bit for bit.
"""

import json
import math

import numpy as np

Point = tuple[float, float]
Edge = tuple[int, int]

# Grid resolution clamp: cell side h = 1/m with m in [GRID_MIN, GRID_MAX].
GRID_MIN_CELLS = 4
GRID_MAX_CELLS = 64


def normalize_points(raw: np.ndarray) -> np.ndarray:
    """Map raw coordinates into [0,1]^2 preserving aspect ratio.

    Translates the min corner to the origin and divides both axes by the
    single largest extent, so angles (and hence purity orders) are
    unchanged.  A degenerate input (all points coincident) maps to the
    origin.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ValueError("expected an (N, 2) coordinate array")
    lo = raw.min(axis=0)
    span = float(max(raw.max(axis=0)[0] - lo[0], raw.max(axis=0)[1] - lo[1]))
    if span <= 0.0:
        return np.zeros_like(raw)
    return (raw - lo) / span


class Instance:
    """An immutable set of N >= 2 points in [0,1]^2 with a bucket grid.

    The grid partitions the unit square into m x m cells (cell side
    1/m, m = ceil(sqrt(N)) clamped to [4, 64]) and is used only by the
    accelerated range queries; every operation is read-only after
    construction.
    """

    __slots__ = ("points", "grid_cells", "_buckets")

    def __init__(self, points: np.ndarray, grid_cells: int | None = None):
        pts = np.array(points, dtype=np.float64, order="C", copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("expected an (N, 2) coordinate array")
        if len(pts) < 2:
            raise ValueError("an instance needs at least 2 points")
        if not np.isfinite(pts).all():
            raise ValueError("coordinates must be finite")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise ValueError("coordinates must lie in [0,1]; use from_raw() to normalize")
        pts.flags.writeable = False
        self.points = pts
        if grid_cells is None:
            grid_cells = min(max(math.isqrt(len(pts) - 1) + 1, GRID_MIN_CELLS), GRID_MAX_CELLS)
        if grid_cells < 1:
            raise ValueError("grid_cells must be positive")
        self.grid_cells = int(grid_cells)
        m = self.grid_cells
        cols = np.minimum((pts[:, 0] * m).astype(np.int64), m - 1)
        rows = np.minimum((pts[:, 1] * m).astype(np.int64), m - 1)
        cell = cols * m + rows
        order = np.argsort(cell, kind="stable")
        self._buckets: dict[int, np.ndarray] = {
            int(c): order[cell[order] == c] for c in np.unique(cell)
        }

    # -- construction ---------------------------------------------------

    @classmethod
    def from_raw(cls, raw: np.ndarray, grid_cells: int | None = None) -> "Instance":
        """Build an instance from arbitrary coordinates via normalize_points."""
        return cls(normalize_points(raw), grid_cells=grid_cells)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def cell_side(self) -> float:
        return 1.0 / self.grid_cells

    def bucket_indices(self) -> list[np.ndarray]:
        """Point indices per occupied grid cell (partition of range(n))."""
        return list(self._buckets.values())

    def points_in_box(self, x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
        """Indices of all points stored in grid cells intersecting the box."""
        m = self.grid_cells
        c0 = min(max(int(math.floor(x0 * m)), 0), m - 1)
        c1 = min(max(int(math.floor(x1 * m)), 0), m - 1)
        r0 = min(max(int(math.floor(y0 * m)), 0), m - 1)
        r1 = min(max(int(math.floor(y1 * m)), 0), m - 1)
        hits = []
        for c in range(c0, c1 + 1):
            base = c * m
            for r in range(r0, r1 + 1):
                b = self._buckets.get(base + r)
                if b is not None:
                    hits.append(b)
        if not hits:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(hits)

    # -- serialization --------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "points": [[float(x), float(y)] for x, y in self.points]})

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        obj = json.loads(text)
        pts = np.array(obj["points"], dtype=np.float64)
        if len(pts) != obj["n"]:
            raise ValueError("point count does not match 'n'")
        return cls(pts)

    def to_bytes(self) -> bytes:
        """Row-major little-endian float64 coordinate payload."""
        return self.points.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Instance":
        if len(blob) % 16 != 0:
            raise ValueError("payload length is not a multiple of 16 bytes")
        pts = np.frombuffer(blob, dtype="<f8").reshape(-1, 2)
        return cls(pts.astype(np.float64))

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, grid={self.grid_cells}x{self.grid_cells})"


def _check_pair(inst: Instance, i: int, j: int) -> None:
    n = inst.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"vertex index out of range: ({i}, {j}) for n={n}")
    if i == j:
        raise ValueError("purity order is undefined for a self-edge")


def purity_order(inst: Instance, i: int, j: int) -> int:
    """Number of vertices strictly inside the circle with diameter (i, j)."""
    _check_pair(inst, i, j)
    pts = inst.points
    di = pts[i] - pts
    dj = pts[j] - pts
    dots = (di * dj).sum(axis=1)
    return int(np.count_nonzero(dots < 0.0))


def purity_order_fast(inst: Instance, i: int, j: int) -> int:
    """Same value as purity_order, inspecting only grid cells that
    intersect the bounding box of the diametral circle."""
    _check_pair(inst, i, j)
    pts = inst.points
    pi, pj = pts[i], pts[j]
    cx, cy = (pi[0] + pj[0]) / 2.0, (pi[1] + pj[1]) / 2.0
    r = math.dist(pi, pj) / 2.0
    cand = inst.points_in_box(cx - r, cy - r, cx + r, cy + r)
    if len(cand) == 0:
        return 0
    sub = pts[cand]
    di = pi - sub
    dj = pj - sub
    dots = (di * dj).sum(axis=1)
    return int(np.count_nonzero(dots < 0.0))


def all_pairs_purity(inst: Instance, row_block: int = 64) -> np.ndarray:
    """Symmetric N x N matrix of purity orders (diagonal left at 0).

    Row-blocked so memory stays O(block * N); each entry is computed with
    the same elementwise arithmetic as purity_order.
    """
    pts = inst.points
    n = inst.n
    out = np.zeros((n, n), dtype=np.int64)
    diffs = pts[:, None, :] - pts[None, :, :]  # diffs[a, k] = x_a - x_k
    for start in range(0, n, row_block):
        stop = min(start + row_block, n)
        block = diffs[start:stop]                       # (B, n, 2)
        dots = (block[:, None, :, :] * diffs[None, :, :, :]).sum(axis=-1)
        out[start:stop] = np.count_nonzero(dots < 0.0, axis=-1)
    return out


def purity_rows(inst: Instance, rows: np.ndarray, cols: np.ndarray | None = None) -> np.ndarray:
    """Purity orders for the given row vertices against col vertices.

    Entries where row and col index coincide are 0 (self-edges are not
    meaningful; callers mask them).  Counting is always over the full
    instance vertex set.
    """
    pts = inst.points
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.arange(inst.n, dtype=np.int64) if cols is None else np.asarray(cols, dtype=np.int64)
    dr = pts[rows][:, None, :] - pts[None, :, :]   # (R, n, 2)
    dc = pts[cols][:, None, :] - pts[None, :, :]   # (C, n, 2)
    dots = (dr[:, None, :, :] * dc[None, :, :, :]).sum(axis=-1)
    return np.count_nonzero(dots < 0.0, axis=-1)


def edge_purity_orders(inst: Instance, heads: np.ndarray, tails: np.ndarray,
                       block: int = 128) -> np.ndarray:
    """Purity orders of the edges (heads[e], tails[e]), vectorized."""
    pts = inst.points
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    out = np.empty(len(heads), dtype=np.int64)
    for start in range(0, len(heads), block):
        stop = min(start + block, len(heads))
        da = pts[heads[start:stop]][:, None, :] - pts[None, :, :]
        db = pts[tails[start:stop]][:, None, :] - pts[None, :, :]
        dots = (da * db).sum(axis=-1)
        out[start:stop] = np.count_nonzero(dots < 0.0, axis=-1)
    return out


def sorted_partners(inst: Instance, purity: np.ndarray | None = None) -> np.ndarray:
    """For each vertex, all other vertices sorted by ascending purity
    order, ties broken by ascending partner index.

    Returns an (N, N-1) index array.
    """
    K = all_pairs_purity(inst) if purity is None else purity
    n = inst.n
    work = K.astype(np.int64, copy=True)
    np.fill_diagonal(work, np.iinfo(np.int64).max)  # push self past every partner
    order = np.argsort(work, axis=1, kind="stable")
    return order[:, : n - 1]
