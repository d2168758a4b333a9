import math

import numpy as np
import pytest

from purity_tsp.generators import GenSpec, generate
from purity_tsp.geometry import Instance


def brute_purity_order(inst: Instance, i: int, j: int) -> int:
    """Independent scalar-loop oracle for the covering-set count."""
    pts = inst.points
    count = 0
    for k in range(inst.n):
        dot = ((pts[i, 0] - pts[k, 0]) * (pts[j, 0] - pts[k, 0])
               + (pts[i, 1] - pts[k, 1]) * (pts[j, 1] - pts[k, 1]))
        if dot < 0:
            count += 1
    return count


def brute_availability(inst: Instance, subset) -> float:
    """Double-loop oracle for the mean minimum purity order."""
    subset = list(subset)
    if len(subset) <= 1:
        return 0.0
    total = 0
    for i in subset:
        total += min(brute_purity_order(inst, i, j) for j in subset if j != i)
    return total / len(subset)


def cycle_lengths_equal(a, b) -> bool:
    """Whether two vertex sequences describe the same cycle up to
    rotation and direction."""
    a, b = list(a), list(b)
    if len(a) != len(b):
        return False
    doubled = a + a
    for seq in (b, b[::-1]):
        for s in range(len(a)):
            if doubled[s:s + len(a)] == seq:
                return True
    return False


@pytest.fixture
def uniform12():
    return generate(GenSpec("uniform", 12, 42))


@pytest.fixture
def collinear3():
    return Instance(np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]))


def circle_instance(n: int, jitter_seed: int | None = None) -> Instance:
    """Points on a common circle (convex position), hull order = 0..n-1."""
    theta = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    if jitter_seed is not None:
        rng = np.random.default_rng(jitter_seed)
        theta = np.sort(theta + rng.normal(0, 0.01, n))
    pts = 0.5 + 0.45 * np.column_stack([np.cos(theta), np.sin(theta)])
    return Instance(pts)
