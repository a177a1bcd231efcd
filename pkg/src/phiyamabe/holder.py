"""Geometry-adapted Hoelder seminorms and weighted sup norms.

Seminorms of sampled space-time fields use the collar distance in x and
parabolic scaling in t.  Exact pair enumeration is used up to a budget;
beyond it a deterministic stratified subsample stands in, and the local
(threshold-restricted) seminorm always filters the same pair set, so the
norm-equivalence inequality holds for the sampled values as well.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HolderParams",
    "SampledField",
    "holder_seminorm",
    "local_holder_seminorm",
    "weighted_sup_norm",
]

PAIR_BUDGET = 10_000
_PAIR_SEED = 177


@dataclass(frozen=True)
class HolderParams:
    """alpha in (0,1), locality threshold delta > 0, weight exponent gamma >= 0."""

    alpha: float
    delta: float = 0.5
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class SampledField:
    """Radial field sampled on grid nodes at increasing times.

    values has shape (n_times, n_nodes).
    """

    grid: object
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (times.size, self.grid.n):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"({times.size}, {self.grid.n})"
            )
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_points(self):
        return self.times.size * self.grid.n


def _radial_dist(x_a, x_b):
    s = x_a + x_b
    return np.abs(x_a - x_b) / s**2


def _pair_arrays(s, budget=PAIR_BUDGET, exhaustive=None):
    """Index pairs (flattened point indices) used for the supremum.

    Exhaustive enumeration when the pair count fits the budget, otherwise
    a fixed-seed stratified sample: same-time pairs, same-node pairs and
    unconstrained pairs in equal parts.
    """
    n_pts = s.n_points
    n_pairs = n_pts * (n_pts - 1) // 2
    if exhaustive is None:
        exhaustive = n_pairs <= budget
    if exhaustive:
        i, j = np.triu_indices(n_pts, k=1)
        return i, j
    rng = np.random.default_rng(_PAIR_SEED)
    n_nodes = s.grid.n
    n_times = s.times.size
    k = budget // 3
    parts = []
    # same time, different nodes
    ti = rng.integers(0, n_times, size=k)
    a = rng.integers(0, n_nodes, size=k)
    b = rng.integers(0, n_nodes, size=k)
    parts.append((ti * n_nodes + a, ti * n_nodes + b))
    # same node, different times
    ni = rng.integers(0, n_nodes, size=k)
    ta = rng.integers(0, n_times, size=k)
    tb = rng.integers(0, n_times, size=k)
    parts.append((ta * n_nodes + ni, tb * n_nodes + ni))
    # unconstrained
    pa = rng.integers(0, n_pts, size=k)
    pb = rng.integers(0, n_pts, size=k)
    parts.append((pa, pb))
    i = np.concatenate([p[0] for p in parts])
    j = np.concatenate([p[1] for p in parts])
    keep = i != j
    return i[keep], j[keep]


def _quotients(s, alpha, i, j):
    n_nodes = s.grid.n
    x = s.grid.nodes
    t = s.times
    v = s.values.ravel()
    xi = x[i % n_nodes]
    xj = x[j % n_nodes]
    ti = t[i // n_nodes]
    tj = t[j // n_nodes]
    denom = _radial_dist(xi, xj) ** alpha + np.abs(ti - tj) ** (alpha / 2.0)
    num = np.abs(v[i] - v[j])
    return num, denom


def holder_seminorm(s, alpha, exhaustive=None):
    """Hoelder quotient supremum over sampled point pairs."""
    if s.n_points < 2:
        raise ValueError("need at least 2 sample points")
    i, j = _pair_arrays(s, exhaustive=exhaustive)
    num, denom = _quotients(s, alpha, i, j)
    mask = denom > 0
    if not mask.any():
        return 0.0
    return float((num[mask] / denom[mask]).max())


def local_holder_seminorm(s, alpha, delta, exhaustive=None):
    """Hoelder quotient supremum restricted to pairs with
    d^alpha + |dt|^(alpha/2) <= delta."""
    if s.n_points < 2:
        raise ValueError("need at least 2 sample points")
    i, j = _pair_arrays(s, exhaustive=exhaustive)
    num, denom = _quotients(s, alpha, i, j)
    mask = (denom > 0) & (denom <= delta)
    if not mask.any():
        return 0.0
    return float((num[mask] / denom[mask]).max())


def weighted_sup_norm(grid, values, gamma, reference=None):
    """sup over nodes of x^gamma |values - reference| (zero reference default)."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    v = np.asarray(values, dtype=float)
    if reference is not None:
        v = v - np.asarray(reference, dtype=float)
    return float((grid.nodes**gamma * np.abs(v)).max())
