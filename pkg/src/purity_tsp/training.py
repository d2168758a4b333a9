"""REINFORCE with a greedy-rollout baseline, and the purity-weighted
variant (PUPO) that multiplies each step's log-probability gradient by
its discounted purity weighting.

Both trainers follow the same loop: every step draws a fresh batch of
instances, scores the sampled rollout against the frozen baseline
policy's greedy rollout, and applies plain gradient descent on expected
tour length.  At each epoch end the baseline adopts the current
parameters only when they strictly improve the mean greedy length on a
fixed held-out evaluation set.  Runs are single-threaded and bit-for-bit
reproducible from (config, seed).
"""

import json
import time
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .generators import DISTRIBUTIONS, GenSpec, derive_seed, generate
from .geometry import Instance, all_pairs_purity, sorted_partners
from .policy import FEATURE_COUNT, PolicyParams, RolloutResult, rollout
from .purity import PurityTrace, purity_profile, purity_trace
from .solvers import held_karp, local_search_solve

MODES = ("vanilla", "pupo")

# Purity weightings multiply the per-step gradient terms by roughly their
# discounted cost-to-go, so the purity-weighted gradient runs several times
# larger than the plain one; its default step size is scaled down to match
# (both remain fully configurable).
MODE_LEARNING_RATES = {"vanilla": 0.05, "pupo": 0.003}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    steps_per_epoch: int = 50
    batch_size: int = 64
    scale: int = 20
    mode: str = "vanilla"
    discount: float = 0.95
    learning_rate: float | None = None
    seed: int = 0
    distribution: str = "uniform"
    baseline_eval_size: int = 128
    reference_restarts: int = 8

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.learning_rate is None:
            object.__setattr__(self, "learning_rate", MODE_LEARNING_RATES[self.mode])
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if min(self.epochs, self.steps_per_epoch, self.batch_size) < 1:
            raise ValueError("epochs, steps_per_epoch and batch_size must be positive")
        if self.scale < 3:
            raise ValueError("training scale must be at least 3")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be nonnegative")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        known = {k: obj[k] for k in cls.__dataclass_fields__ if k in obj}
        unknown = set(obj) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)


def load_config(path, overrides: dict | None = None) -> TrainConfig:
    """TrainConfig from a JSON or TOML file plus flag overrides."""
    text = open(path, "rb").read()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        obj = tomllib.loads(text.decode())
    else:
        obj = json.loads(text)
    obj.update(overrides or {})
    return TrainConfig.from_dict(obj)


def reinforce_gradient(rollouts: list[RolloutResult], baselines: list[float]) -> np.ndarray:
    """Mean over the batch of (L - baseline) * sum_t grad log p_t."""
    if len(rollouts) != len(baselines):
        raise ValueError("one baseline value per rollout is required")
    g = np.zeros(FEATURE_COUNT)
    for r, b in zip(rollouts, baselines):
        g += (r.tour.length - b) * r.step_grads[1:].sum(axis=0)
    return g / len(rollouts)


def pupo_gradient(rollouts: list[RolloutResult], traces: list[PurityTrace],
                  baselines: list[float]) -> np.ndarray:
    """Purity-weighted policy gradient: each step's term is scaled by the
    weighting of the state-action pair that chose it.

    With all purity costs zero every weighting is 1 and this reduces
    exactly to reinforce_gradient.
    """
    if not (len(rollouts) == len(traces) == len(baselines)):
        raise ValueError("rollouts, traces and baselines must align")
    g = np.zeros(FEATURE_COUNT)
    for r, tr, b in zip(rollouts, traces, baselines):
        n = len(r.tour.order)
        if len(tr.costs) != n:
            raise ValueError("trace does not match rollout length")
        g += (r.tour.length - b) * (tr.weights[: n - 1] @ r.step_grads[1:])
    return g / len(rollouts)


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    mean_sampled_length: float
    eval_greedy_length: float
    eval_gap_pct: float
    eval_prop0: float
    param_norm: float
    baseline_updated: bool


@dataclass(frozen=True)
class TrainReport:
    config: TrainConfig
    rows: list[EpochRow]

    def to_csv(self) -> str:
        lines = ["# purity-tsp train-report v1",
                 "epoch,mean_sampled_length,eval_greedy_length,eval_gap_pct,"
                 "eval_prop0,param_norm,baseline_updated"]
        for r in self.rows:
            lines.append(f"{r.epoch},{r.mean_sampled_length:.6f},{r.eval_greedy_length:.6f},"
                         f"{r.eval_gap_pct:.4f},{r.eval_prop0:.6f},{r.param_norm:.6f},"
                         f"{int(r.baseline_updated)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        last = self.rows[-1]
        return {"config": self.config.to_dict(),
                "final_eval_greedy_length": last.eval_greedy_length,
                "final_eval_gap_pct": last.eval_gap_pct,
                "final_eval_prop0": last.eval_prop0,
                "final_param_norm": last.param_norm,
                "epochs": len(self.rows)}


class _EvalSet:
    """Fixed held-out instances with cached purity matrices and
    near-optimal reference lengths."""

    def __init__(self, config: TrainConfig):
        self.items = []
        for k in range(config.baseline_eval_size):
            spec = GenSpec(config.distribution, config.scale,
                           derive_seed(config.seed, config.scale, config.distribution,
                                       1_000_000 + k))
            inst = generate(spec)
            self.items.append((inst, all_pairs_purity(inst)))
        self.ref_lengths = np.array([
            local_search_solve(inst, restarts=config.reference_restarts,
                               seed=derive_seed(config.seed, k, "ref", 0)).length
            for k, (inst, _) in enumerate(self.items)])

    def greedy_stats(self, params: PolicyParams) -> tuple[float, float, float]:
        lengths = np.empty(len(self.items))
        prop0 = np.empty(len(self.items))
        for k, (inst, K) in enumerate(self.items):
            r = rollout(inst, params, "greedy", purity=K, want_grads=False)
            lengths[k] = r.tour.length
            prop0[k] = purity_profile(inst, r.tour).prop0
        gaps = 100.0 * (lengths - self.ref_lengths) / self.ref_lengths
        return float(lengths.mean()), float(gaps.mean()), float(prop0.mean())


def train(config: TrainConfig) -> tuple[PolicyParams, TrainReport]:
    """Run the configured training loop and return final parameters plus
    the per-epoch report."""
    inst_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x11]))
    samp_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x22]))

    params = PolicyParams.zeros()
    baseline = params
    evalset = _EvalSet(config)
    bl_mean, _, _ = evalset.greedy_stats(baseline)

    rows: list[EpochRow] = []
    for epoch in range(1, config.epochs + 1):
        sampled_total = 0.0
        for _ in range(config.steps_per_epoch):
            rollouts: list[RolloutResult] = []
            traces: list[PurityTrace] = []
            baselines: list[float] = []
            for _ in range(config.batch_size):
                spec = GenSpec(config.distribution, config.scale,
                               int(inst_rng.integers(2 ** 62)))
                inst = generate(spec)
                K = all_pairs_purity(inst)
                samp = rollout(inst, params, "sample",
                               seed=int(samp_rng.integers(2 ** 62)), purity=K)
                base = rollout(inst, baseline, "greedy", purity=K, want_grads=False)
                rollouts.append(samp)
                baselines.append(base.tour.length)
                sampled_total += samp.tour.length
                if config.mode == "pupo":
                    traces.append(purity_trace(inst, samp.tour.order, config.discount,
                                               purity=K,
                                               partners=sorted_partners(inst, K)))
            if config.mode == "pupo":
                grad = pupo_gradient(rollouts, traces, baselines)
            else:
                grad = reinforce_gradient(rollouts, baselines)
            params = PolicyParams(params.weights - config.learning_rate * grad)
        cur_mean, cur_gap, cur_prop0 = evalset.greedy_stats(params)
        updated = cur_mean < bl_mean
        if updated:
            baseline = params
            bl_mean = cur_mean
        rows.append(EpochRow(
            epoch=epoch,
            mean_sampled_length=sampled_total / (config.steps_per_epoch * config.batch_size),
            eval_greedy_length=cur_mean,
            eval_gap_pct=cur_gap,
            eval_prop0=cur_prop0,
            param_norm=params.norm,
            baseline_updated=updated))
    return params, TrainReport(config, rows)


@dataclass(frozen=True)
class EvalRow:
    index: int
    model_length: float
    ref_length: float
    gap_pct: float
    prop0: float
    apo_all: float
    apo_non0: float


@dataclass(frozen=True)
class EvalResult:
    rows: list[EvalRow]

    @property
    def mean_gap(self) -> float:
        return float(np.mean([r.gap_pct for r in self.rows]))

    @property
    def mean_prop0(self) -> float:
        return float(np.mean([r.prop0 for r in self.rows]))

    @property
    def mean_length(self) -> float:
        return float(np.mean([r.model_length for r in self.rows]))

    def to_csv(self) -> str:
        lines = ["# purity-tsp eval-report v1",
                 "index,model_length,ref_length,gap_pct,prop0,apo_all,apo_non0"]
        for r in self.rows:
            lines.append(f"{r.index},{r.model_length:.6f},{r.ref_length:.6f},"
                         f"{r.gap_pct:.4f},{r.prop0:.6f},{r.apo_all:.6f},{r.apo_non0:.6f}")
        lines.append(f"mean,{self.mean_length:.6f},,{self.mean_gap:.4f},"
                     f"{self.mean_prop0:.6f},,")
        return "\n".join(lines) + "\n"


def evaluate(params: PolicyParams, instances: list[Instance], reference: str = "local_search",
             restarts: int = 10, seed: int = 0, held_karp_cap: int = 16,
             purity_cache: list[np.ndarray] | None = None,
             ref_lengths: list[float] | None = None) -> EvalResult:
    """Greedy-decode each instance and report gaps against the reference
    solver plus per-tour purity profiles.

    reference "held_karp" raises CapacityError beyond its size cap;
    explicit ref_lengths skip reference solving entirely.
    """
    rows = []
    for k, inst in enumerate(instances):
        K = purity_cache[k] if purity_cache is not None else all_pairs_purity(inst)
        if ref_lengths is not None:
            ref = float(ref_lengths[k])
        elif reference == "held_karp":
            if inst.n > held_karp_cap:
                raise CapacityError(
                    f"held_karp reference infeasible for n={inst.n} > {held_karp_cap}")
            ref = held_karp(inst, cap=held_karp_cap).length
        elif reference == "local_search":
            ref = local_search_solve(inst, restarts=restarts,
                                     seed=derive_seed(seed, inst.n, "eval-ref", k)).length
        else:
            raise ValueError(f"unknown reference {reference!r}")
        r = rollout(inst, params, "greedy", purity=K, want_grads=False)
        prof = purity_profile(inst, r.tour)
        rows.append(EvalRow(k, r.tour.length, ref,
                            100.0 * (r.tour.length - ref) / ref,
                            prof.prop0, prof.apo_all, prof.apo_non0))
    return EvalResult(rows)


def greedy_wall_time(params: PolicyParams, instances: list[Instance],
                     purity_cache: list[np.ndarray], repeats: int = 5) -> float:
    """Median wall time of greedily decoding the whole suite.

    Used to confirm that differently trained parameter vectors decode in
    the same time (they share shape, so any difference is noise)."""
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for inst, K in zip(instances, purity_cache):
            rollout(inst, params, "greedy", purity=K, want_grads=False)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def param_norm_report(entries: list[tuple[str, PolicyParams]]) -> str:
    """Euclidean norms of trained parameter vectors, side by side."""
    lines = ["# purity-tsp param-norm-report v1", "label,norm"]
    for label, params in entries:
        lines.append(f"{label},{params.norm:.6f}")
    return "\n".join(lines) + "\n"
