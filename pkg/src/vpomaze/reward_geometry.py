"""Preference-weight geometry over reward vectors.

A candidate set S of reward vectors is scored by E_w[max_{r in S} w.r]
where w is a Dirichlet(alpha) draw on the simplex.  This module provides
the Dirichlet sampling, scalarization presets, the Monte-Carlo estimator
over a shared weight matrix, and exact evaluation of the expectation for
alpha = 1: a closed-form upper-envelope integral at d = 2 and a dense
composition-grid quadrature at d in {3, 4}.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "WeightVector",
    "sample_dirichlet",
    "sample_weight_matrix",
    "scalarize",
    "uniform_mean",
    "ScalarPreset",
    "PRESETS",
    "gold_scalar",
    "set_reward_mc",
    "ExactSetReward",
    "set_reward_exact",
    "EXACT_RESOLUTIONS",
]


@dataclass(frozen=True)
class WeightVector:
    """A point on the probability simplex plus the alpha that produced it."""

    w: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        alpha = np.asarray(self.alpha, dtype=np.float64)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "alpha", alpha)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weight vector must be 1-D and non-empty")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        if alpha.shape != w.shape or np.any(alpha <= 0):
            raise ValueError("alpha must be positive and match the weight shape")


def _alpha_vec(alpha, d: int) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64)
    if a.ndim == 0:
        a = np.full(d, float(a))
    if a.shape != (d,) or np.any(a <= 0):
        raise ValueError(f"alpha must be a positive scalar or length-{d} vector")
    return a


def sample_dirichlet(rng: np.random.Generator, alpha=1.0, d: int = 4) -> WeightVector:
    a = _alpha_vec(alpha, d)
    return WeightVector(w=rng.dirichlet(a), alpha=a)


def sample_weight_matrix(rng: np.random.Generator, k: int, alpha=1.0, d: int = 4) -> np.ndarray:
    """k Dirichlet draws as a (k, d) matrix (the shared-draw form)."""
    a = _alpha_vec(alpha, d)
    return rng.dirichlet(a, size=k)


def _as_weights(w) -> np.ndarray:
    return w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)


def scalarize(w, r) -> float:
    return float(np.dot(_as_weights(w), np.asarray(r, dtype=np.float64)))


def uniform_mean(r) -> float:
    return float(np.mean(np.asarray(r, dtype=np.float64)))


@dataclass(frozen=True)
class ScalarPreset:
    """Named fixed scalarization; weights are nonnegative and sum to 1."""

    name: str
    weights: np.ndarray


PRESETS = {
    # Uniform mean of the 4 maze reward dimensions.
    "maze_uniform": ScalarPreset("maze_uniform", np.full(4, 0.25)),
    # Multi-hop QA scalar: 4 per-hop correctness dims plus a final-answer
    # dim weighted 3x, normalized.  Data-only preset, kept for parity.
    "musique_3x": ScalarPreset("musique_3x", np.array([1, 1, 1, 1, 3], dtype=np.float64) / 7.0),
}


def gold_scalar(r, preset: str = "maze_uniform") -> float:
    try:
        p = PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown scalar preset: {preset!r}") from None
    r = np.asarray(r, dtype=np.float64)
    if r.shape != p.weights.shape:
        raise ValueError(f"preset {preset!r} expects {p.weights.shape[0]} dims, got {r.shape}")
    return float(np.dot(p.weights, r))


def set_reward_mc(rewards, weights) -> float:
    """(1/K) sum_k max_{r in S} w_k . r over a shared weight matrix.

    Monotone in S by construction: growing the set can only raise each
    per-draw maximum.
    """
    r = np.asarray(rewards, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] == 0:
        raise ValueError("rewards must be a non-empty (set, dim) matrix")
    if w.ndim != 2 or w.shape[1] != r.shape[1]:
        raise ValueError("weights must be (draws, dim) with matching dim")
    return float(np.mean(np.max(w @ r.T, axis=1)))


@dataclass(frozen=True)
class ExactSetReward:
    value: float
    error_bound: float
    method: str
    nodes: int


# Quadrature resolutions chosen so every grid has >= 2e5 nodes:
# d=3 -> C(1416,2) = 1,001,820 nodes; d=4 -> C(163,3) = 708,561 nodes.
EXACT_RESOLUTIONS = {3: 1414, 4: 160}


def _envelope_integral_d2(rewards: np.ndarray) -> float:
    """Exact E_t[max_i (t*r_i0 + (1-t)*r_i1)] for t uniform on [0,1].

    Each candidate is a line in t.  Between consecutive pairwise
    intersection points one line dominates, so we split [0,1] at all
    intersections and integrate the winner of each piece analytically.
    """
    a = rewards[:, 0] - rewards[:, 1]
    b = rewards[:, 1]
    cuts = {0.0, 1.0}
    n = len(a)
    for i in range(n):
        for j in range(i + 1, n):
            da = a[i] - a[j]
            if da != 0.0:
                t = (b[j] - b[i]) / da
                if 0.0 < t < 1.0:
                    cuts.add(float(t))
    ts = sorted(cuts)
    total = 0.0
    for t0, t1 in zip(ts[:-1], ts[1:]):
        mid = 0.5 * (t0 + t1)
        i = int(np.argmax(a * mid + b))
        total += 0.5 * a[i] * (t1 * t1 - t0 * t0) + b[i] * (t1 - t0)
    return total


@lru_cache(maxsize=4)
def _composition_grid(d: int, n: int) -> np.ndarray:
    """All length-d nonnegative integer compositions of n, as floats.

    Both node clouds built from this lattice (closed k/n and shifted
    (k+1)/(n+d)) are symmetric about the simplex centroid, so their mean
    is exactly (1/d, ..., 1/d) and grid averages of affine functions match
    their uniform-simplex expectations.
    """
    if d == 3:
        blocks = []
        for i in range(n + 1):
            js = np.arange(n - i + 1)
            block = np.empty((js.size, 3), dtype=np.float64)
            block[:, 0] = i
            block[:, 1] = js
            block[:, 2] = n - i - js
            blocks.append(block)
        return np.concatenate(blocks)
    if d == 4:
        blocks = []
        for i in range(n + 1):
            for j in range(n - i + 1):
                ks = np.arange(n - i - j + 1)
                block = np.empty((ks.size, 4), dtype=np.float64)
                block[:, 0] = i
                block[:, 1] = j
                block[:, 2] = ks
                block[:, 3] = n - i - j - ks
                blocks.append(block)
        return np.concatenate(blocks)
    raise ValueError(f"no composition grid for d={d}")


def set_reward_exact(rewards, alpha: float = 1.0, resolution: int | None = None) -> ExactSetReward:
    """Exact (d=2) or deterministic-quadrature (d=3,4) expected set reward.

    Only alpha = 1 (uniform on the simplex) is supported; that is the
    regime the Monte-Carlo estimator is checked against.
    """
    if not np.all(np.asarray(alpha, dtype=np.float64) == 1.0):
        raise NotImplementedError("exact set reward is implemented for alpha = 1 only")
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] == 0:
        raise ValueError("rewards must be a non-empty (set, dim) matrix")
    d = r.shape[1]
    if d == 1:
        return ExactSetReward(float(r.max()), 0.0, "degenerate-d1", 1)
    if d == 2:
        return ExactSetReward(float(_envelope_integral_d2(r)), 0.0, "envelope-d2", 0)
    if d not in EXACT_RESOLUTIONS:
        raise ValueError(f"exact set reward supports d in 1..4, got {d}")
    n = int(resolution) if resolution is not None else EXACT_RESOLUTIONS[d]
    grid = _composition_grid(d, n)
    # Average of the closed rule (nodes k/n) and the shifted interior rule
    # (nodes (k+1)/(n+d)).  Their leading O(1/n) errors have opposite sign
    # (boundary surplus vs deficit) and cancel, leaving O(1/n^2) from the
    # kink cells of the max.  The shifted scores come from the same product
    # because (k+1).r = k.r + sum_j r_j.
    scores = grid @ r.T
    closed = float(np.mean(np.max(scores / n, axis=1)))
    shifted = float(np.mean(np.max((scores + r.sum(axis=1)) / (n + d), axis=1)))
    value = 0.5 * (closed + shifted)
    if r.shape[0] == 1:
        # Affine integrand: both grid averages are exact by centroid symmetry.
        bound = 0.0
    else:
        spread = float(np.max(r.max(axis=0) - r.min(axis=0)))
        bound = 8.0 * (d - 1) * spread / (n * n)
    return ExactSetReward(value, bound, "composition-grid", 2 * grid.shape[0])
