"""Pooled purity-order histograms and the negative-exponential law fit.

Edges are pooled across all instances of a (scale, distribution) cell
before proportions are formed, so each cell yields one fitted curve.
The fit minimizes squared error in linear space (Levenberg-Marquardt on
y = alpha * exp(-beta * k), seeded by a log-space head fit): tiny tail
bins carry negligible weight, which is what reproduces the reference
coefficients; an unweighted log-space regression would be dominated by
single-count tail bins.  fit_error is the linear-space mean squared
error over the same positive bins.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError

_SCHEMA_REPORT = "purity-tsp purity-law-report v1"
_SCHEMA_HIST = "purity-tsp order-histogram v1"


class OrderHistogramPool:
    """Accumulated edge counts per purity order for one instance cell.

    Pools form a commutative monoid under merge, so per-instance
    histograms can be accumulated in any order (or in parallel) with an
    identical result.
    """

    def __init__(self):
        self.counts = np.zeros(8, dtype=np.int64)
        self.n_instances = 0

    @property
    def n_edges(self) -> int:
        return int(self.counts.sum())

    def _grow(self, size: int) -> None:
        if size > len(self.counts):
            grown = np.zeros(max(size, 2 * len(self.counts)), dtype=np.int64)
            grown[: len(self.counts)] = self.counts
            self.counts = grown

    def add_orders(self, orders: np.ndarray) -> None:
        orders = np.asarray(orders, dtype=np.int64)
        if len(orders) == 0:
            return
        self._grow(int(orders.max()) + 1)
        np.add.at(self.counts, orders, 1)
        self.n_instances += 1

    def merge(self, other: "OrderHistogramPool") -> None:
        self._grow(len(other.counts))
        self.counts[: len(other.counts)] += other.counts
        self.n_instances += other.n_instances

    def to_dict(self) -> dict:
        top = int(np.max(np.nonzero(self.counts)[0])) + 1 if self.counts.any() else 0
        return {"schema": _SCHEMA_HIST,
                "counts": [int(c) for c in self.counts[:top]],
                "instances": self.n_instances}

    @classmethod
    def from_dict(cls, obj: dict) -> "OrderHistogramPool":
        pool = cls()
        counts = np.asarray(obj["counts"], dtype=np.int64)
        pool._grow(len(counts))
        pool.counts[: len(counts)] = counts
        pool.n_instances = int(obj.get("instances", 0))
        return pool


def proportions(pool: OrderHistogramPool) -> np.ndarray:
    """y(k) = counts[k] / total edges, trimmed after the last nonzero bin."""
    if pool.n_edges == 0:
        raise RuntimeError("histogram pool is empty")
    top = int(np.max(np.nonzero(pool.counts)[0])) + 1
    return pool.counts[:top] / pool.n_edges


@dataclass(frozen=True)
class FitResult:
    alpha: float
    beta: float
    fit_error: float
    k_used: int


def _log_head_fit(ks: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Log-space least squares over the first <=3 positive bins.

    Exact on data that is exactly exponential, which makes the refined
    fit exact there too.
    """
    m = min(3, len(ks))
    kh, lh = ks[:m], np.log(y[:m])
    kbar, lbar = kh.mean(), lh.mean()
    denom = ((kh - kbar) ** 2).sum()
    slope = ((kh - kbar) * (lh - lbar)).sum() / denom if denom > 0 else 0.0
    return float(np.exp(lbar - slope * kbar)), float(-slope)


def fit_purity_law(y: np.ndarray | dict[int, float]) -> FitResult:
    """Fit y(k) = alpha * exp(-beta * k) over bins with y(k) > 0.

    Raises DegenerateFitError with fewer than two positive bins.
    """
    if isinstance(y, dict):
        dense = np.zeros(max(y) + 1 if y else 0)
        for k, v in y.items():
            dense[k] = v
        y = dense
    y = np.asarray(y, dtype=np.float64)
    pos = np.flatnonzero(y > 0)
    if len(pos) < 2:
        raise DegenerateFitError("need at least two positive bins to fit")
    ks = pos.astype(np.float64)
    yy = y[pos]

    alpha, beta = _log_head_fit(ks, yy)
    lam = 1e-3
    residual = alpha * np.exp(-beta * ks) - yy
    cost = float(residual @ residual)
    for _ in range(200):
        e = np.exp(-beta * ks)
        jac = np.column_stack([e, -alpha * ks * e])
        g = jac.T @ residual
        h = jac.T @ jac
        step = None
        for _ in range(25):
            damped = h + lam * np.diag(np.diag(h))
            try:
                step = np.linalg.solve(damped, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = np.array([alpha + step[0], beta + step[1]])
            r2 = cand[0] * np.exp(-cand[1] * ks) - yy
            c2 = float(r2 @ r2)
            if c2 <= cost:
                alpha, beta = float(cand[0]), float(cand[1])
                residual, prev_cost, cost = r2, cost, c2
                lam = max(lam / 3.0, 1e-12)
                break
            lam *= 10.0
        else:
            break
        if abs(step[0]) <= 1e-15 * (1 + abs(alpha)) and abs(step[1]) <= 1e-15 * (1 + abs(beta)):
            break
        if prev_cost - cost <= 1e-18 * max(cost, 1e-30):
            break
    return FitResult(alpha=alpha, beta=beta,
                     fit_error=cost / len(pos), k_used=int(len(pos)))


@dataclass(frozen=True)
class CellReport:
    scale: int
    distribution: str
    fit: FitResult
    prop0: float
    apo_all: float
    apo_non0: float
    instances: int
    edges: int


def cell_report(scale: int, distribution: str, pool: OrderHistogramPool) -> CellReport:
    y = proportions(pool)
    fit = fit_purity_law(y)
    ks = np.arange(len(pool.counts))
    non0 = int(pool.counts[1:].sum())
    return CellReport(
        scale=scale, distribution=distribution, fit=fit,
        prop0=float(pool.counts[0]) / pool.n_edges,
        apo_all=float((ks * pool.counts).sum()) / pool.n_edges,
        apo_non0=float((ks[1:] * pool.counts[1:]).sum() / non0) if non0 else 0.0,
        instances=pool.n_instances, edges=pool.n_edges)


@dataclass(frozen=True)
class PurityLawReport:
    cells: list[CellReport]

    def summary(self) -> dict[str, dict[str, float]]:
        """Mean and population variance of fit error and coefficients
        across all cells."""
        err = np.array([c.fit.fit_error for c in self.cells])
        alpha = np.array([c.fit.alpha for c in self.cells])
        beta = np.array([c.fit.beta for c in self.cells])
        return {
            "mean": {"fit_error": float(err.mean()), "alpha": float(alpha.mean()),
                     "beta": float(beta.mean())},
            "variance": {"fit_error": float(err.var()), "alpha": float(alpha.var()),
                         "beta": float(beta.var())},
        }

    def to_csv(self) -> str:
        lines = [f"# {_SCHEMA_REPORT}",
                 "scale,distribution,alpha,beta,fit_error,prop0,apo_all,apo_non0"]
        for c in self.cells:
            lines.append(f"{c.scale},{c.distribution},{c.fit.alpha:.6f},{c.fit.beta:.6f},"
                         f"{c.fit.fit_error:.6e},{c.prop0:.6f},{c.apo_all:.6f},{c.apo_non0:.6f}")
        s = self.summary()
        for label in ("mean", "variance"):
            lines.append(f"all,{label},{s[label]['alpha']:.6f},{s[label]['beta']:.6f},"
                         f"{s[label]['fit_error']:.6e},,,")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"schema": _SCHEMA_REPORT,
                "cells": [{"scale": c.scale, "distribution": c.distribution,
                           "alpha": c.fit.alpha, "beta": c.fit.beta,
                           "fit_error": c.fit.fit_error, "k_used": c.fit.k_used,
                           "prop0": c.prop0, "apo_all": c.apo_all,
                           "apo_non0": c.apo_non0, "instances": c.instances,
                           "edges": c.edges}
                          for c in self.cells],
                "summary": self.summary()}


def purity_law_report(pools: dict[tuple[int, str], OrderHistogramPool]) -> PurityLawReport:
    """One report row per (scale, distribution) cell plus the summary."""
    if not pools:
        raise ValueError("no cells to report")
    cells = [cell_report(scale, dist, pool)
             for (scale, dist), pool in sorted(pools.items())]
    return PurityLawReport(cells)


def write_histogram(path, pool: OrderHistogramPool) -> None:
    with open(path, "w") as fh:
        json.dump(pool.to_dict(), fh)


def read_histogram(path) -> OrderHistogramPool:
    with open(path) as fh:
        return OrderHistogramPool.from_dict(json.load(fh))
