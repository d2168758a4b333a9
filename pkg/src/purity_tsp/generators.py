"""Seeded instance generators for the four benchmark distributions.

All randomness flows through numpy's PCG64 seeded from explicit integer
material (never platform-hashed), so any GenSpec reproduces the same
instance bit for bit on every platform.  Suite seeds are derived with
SHA-256 over a canonical string, which keeps suites stable when scales
or distributions are reordered.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import Instance, normalize_points

DISTRIBUTIONS = ("uniform", "clustered", "explosion", "implosion")
_DIST_CODE = {name: k for k, name in enumerate(DISTRIBUTIONS)}

# Distribution parameter defaults; every value can be overridden per spec
# through GenSpec.params.
DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "uniform": {},
    "clustered": {"sigma": 0.12},          # cluster count defaults to max(2, n // 40)
    "explosion": {"radius": 0.3, "eps": 0.03},
    "implosion": {"radius": 0.3, "lam": 0.25},
}


@dataclass(frozen=True)
class GenSpec:
    """Everything needed to regenerate one instance."""

    distribution: str
    n: int
    seed: int
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.n < 2:
            raise ValueError("instance scale must be at least 2")

    def resolved_params(self) -> dict[str, float]:
        out = dict(DEFAULT_PARAMS[self.distribution])
        out.update(self.params)
        return out

    def to_dict(self) -> dict:
        return {"distribution": self.distribution, "n": self.n,
                "seed": int(self.seed), "params": dict(self.params)}

    @classmethod
    def from_dict(cls, obj: dict) -> "GenSpec":
        return cls(obj["distribution"], int(obj["n"]), int(obj["seed"]),
                   dict(obj.get("params", {})))


def _rng_for(spec: GenSpec) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(spec.seed), _DIST_CODE[spec.distribution], int(spec.n)]))


def generate(spec: GenSpec) -> Instance:
    """Generate the instance described by spec (deterministic in spec)."""
    rng = _rng_for(spec)
    n = spec.n
    p = spec.resolved_params()
    if spec.distribution == "uniform":
        return Instance(rng.random((n, 2)))

    if spec.distribution == "clustered":
        n_clusters = int(p.get("n_clusters", max(2, n // 40)))
        sigma = float(p["sigma"])
        centers = rng.random((n_clusters, 2))
        assignment = rng.integers(n_clusters, size=n)
        pts = centers[assignment] + rng.normal(0.0, sigma, (n, 2))
        return Instance(normalize_points(pts))

    pts = rng.random((n, 2))
    center = rng.random(2)
    radius = float(p["radius"])
    offsets = pts - center
    dist = np.hypot(offsets[:, 0], offsets[:, 1])
    inside = dist < radius

    if spec.distribution == "explosion":
        # Points inside the blast radius are pushed just outside it along
        # their ray from the center; a point exactly at the center (measure
        # zero) is pushed along +x for reproducibility.
        if inside.any():
            eps = float(p["eps"])
            d = dist[inside]
            dirs = offsets[inside] / np.where(d > 0, d, 1.0)[:, None]
            dirs[d == 0] = (1.0, 0.0)
            u = rng.random((int(inside.sum()), 1))
            pts = pts.copy()
            pts[inside] = center + (radius + eps * u) * dirs
        return Instance(normalize_points(pts))

    if spec.distribution == "implosion":
        lam = float(p["lam"])
        pts = pts.copy()
        pts[inside] = center + lam * offsets[inside]
        return Instance(normalize_points(pts))

    raise AssertionError("unreachable")


def derive_seed(base_seed: int, scale: int, distribution: str, index: int) -> int:
    """Stable 64-bit suite seed from (base_seed, scale, distribution, index)."""
    material = f"{base_seed}:{scale}:{distribution}:{index}".encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "little")


def generate_suite(scales: list[int], distributions: list[str], count_per_type: int,
                   base_seed: int, paper_protocol: bool = False,
                   params: dict[str, float] | None = None) -> dict[tuple[int, str], list[GenSpec]]:
    """GenSpecs grouped by (scale, distribution) cell.

    With paper_protocol=True the per-cell count follows the reference
    sampling protocol: 256 instances below scale 500, 128 at or above.
    """
    if not scales or not distributions:
        raise ValueError("scales and distributions must be nonempty")
    suite: dict[tuple[int, str], list[GenSpec]] = {}
    for scale in scales:
        for dist in distributions:
            count = (256 if scale < 500 else 128) if paper_protocol else count_per_type
            suite[(scale, dist)] = [
                GenSpec(dist, scale, derive_seed(base_seed, scale, dist, k),
                        dict(params or {}))
                for k in range(count)
            ]
    return suite


def parse_spec_string(text: str) -> GenSpec:
    """Parse the CLI form "dist:scale:seed[:k=v,...]"."""
    parts = text.split(":")
    if len(parts) < 3:
        raise ValueError(f"expected dist:scale:seed[:k=v,...], got {text!r}")
    dist, scale, seed = parts[0], parts[1], parts[2]
    params: dict[str, float] = {}
    if len(parts) > 3:
        for kv in ":".join(parts[3:]).split(","):
            if not kv:
                continue
            key, _, value = kv.partition("=")
            if not _:
                raise ValueError(f"malformed parameter {kv!r} in {text!r}")
            params[key.strip()] = float(value)
    return GenSpec(dist, int(scale), int(seed), params)


def write_manifest(path, suite: dict[tuple[int, str], list[GenSpec]], base_seed: int | None = None) -> None:
    entries = [spec.to_dict() for specs in suite.values() for spec in specs]
    payload = {"schema": "purity-tsp suite-manifest v1", "base_seed": base_seed,
               "entries": entries}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def read_manifest(path) -> dict[tuple[int, str], list[GenSpec]]:
    with open(path) as fh:
        payload = json.load(fh)
    suite: dict[tuple[int, str], list[GenSpec]] = {}
    for obj in payload["entries"]:
        spec = GenSpec.from_dict(obj)
        suite.setdefault((spec.n, spec.distribution), []).append(spec)
    return suite
