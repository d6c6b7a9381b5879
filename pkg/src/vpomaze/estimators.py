"""Group scoring and advantages for the six estimator modes.

Every mode reduces a group of G chains on one maze to one advantage per
chain: score each chain with the mode's rule, then z-score within the
group.  gdpo is the exception: it z-scores each reward dimension across
the group first and then combines the per-dimension z's with fixed
weights.

Modes and their chain scores:
  grpo              gold scalar of the single answer (m must be 1)
  random_w          w.r for a fresh per-chain Dirichlet draw (m = 1)
  multi_rlvr        mean or max gold scalar over answers deduplicated by
                    exact move sequence
  vpo               Monte-Carlo set reward under the group's shared draws
  gdpo              per-dimension z-scores combined with the gold weights
                    (m = 1)
  goal_conditioned  w.r for the chain's own conditioning weights (m = 1)
"""

from dataclasses import dataclass

import numpy as np

from .policy.rollout import CandidateSet
from .reward_geometry import PRESETS, gold_scalar, scalarize, set_reward_mc

__all__ = ["MODES", "SINGLE_ANSWER_MODES", "EstimatorError", "AdvantageResult",
           "grpo_advantages", "gdpo_advantages", "score_chain", "score_group",
           "dedup_answers"]

MODES = ("grpo", "random_w", "multi_rlvr", "vpo", "gdpo", "goal_conditioned")
# Modes whose scoring rule is defined for exactly one answer per chain.
SINGLE_ANSWER_MODES = frozenset({"grpo", "random_w", "gdpo", "goal_conditioned"})


class EstimatorError(ValueError):
    """Invalid estimator input (wrong mode, group too small, bad shapes)."""


@dataclass
class AdvantageResult:
    """Per-chain advantages plus the scores they came from."""

    advantages: np.ndarray
    scores: np.ndarray
    score_mean: float
    score_std: float


def grpo_advantages(scores, eps: float = 1e-6) -> AdvantageResult:
    """Within-group z-score: (s - mean) / (population std + eps)."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size < 2:
        raise EstimatorError(f"need a group of >= 2 scores, got shape {s.shape}")
    mu = float(np.mean(s))
    sigma = float(np.std(s))
    return AdvantageResult(advantages=(s - mu) / (sigma + eps), scores=s,
                           score_mean=mu, score_std=sigma)


def gdpo_advantages(rewards, weights=None, eps: float = 1e-6) -> AdvantageResult:
    """z-score each reward dimension across the group, combine with weights.

    weights defaults to uniform 1/d.  The reported scores are the weighted
    raw rewards, for monitoring only.
    """
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] < 2:
        raise EstimatorError(f"need a (G, d) reward matrix with G >= 2, got {r.shape}")
    d = r.shape[1]
    w = np.full(d, 1.0 / d) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (d,):
        raise EstimatorError(f"combining weights must have shape ({d},)")
    z = (r - r.mean(axis=0)) / (r.std(axis=0) + eps)
    scores = r @ w
    return AdvantageResult(advantages=z @ w, scores=scores,
                           score_mean=float(scores.mean()), score_std=float(scores.std()))


def dedup_answers(cset: CandidateSet) -> list[int]:
    """Indices of the first answer for each distinct move sequence."""
    seen: set[tuple[int, ...]] = set()
    keep = []
    for i, ans in enumerate(cset.answers):
        key = tuple(int(a) for a in ans.moves)
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return keep


def _require_single(mode: str, cset: CandidateSet) -> None:
    if cset.m != 1:
        raise EstimatorError(f"{mode} scores single-answer chains, got m={cset.m}")


def score_chain(mode: str, cset: CandidateSet, *, shared_weights=None,
                chain_weights=None, preset: str = "maze_uniform",
                multi_agg: str = "mean") -> float:
    """Scalar score of one chain under the given mode."""
    if mode == "grpo":
        _require_single(mode, cset)
        return gold_scalar(cset.answers[0].reward, preset)
    if mode == "random_w":
        _require_single(mode, cset)
        if chain_weights is None:
            raise EstimatorError("random_w needs a per-chain weight draw")
        return scalarize(chain_weights, cset.answers[0].reward)
    if mode == "multi_rlvr":
        kept = dedup_answers(cset)
        scalars = [gold_scalar(cset.answers[i].reward, preset) for i in kept]
        if multi_agg == "mean":
            return float(np.mean(scalars))
        if multi_agg == "max":
            return float(np.max(scalars))
        raise EstimatorError(f"unknown multi_rlvr aggregation: {multi_agg!r}")
    if mode == "vpo":
        if shared_weights is None:
            raise EstimatorError("vpo needs the group's shared weight matrix")
        return set_reward_mc(cset.rewards(), shared_weights)
    if mode == "goal_conditioned":
        _require_single(mode, cset)
        if cset.goal_w is None:
            raise EstimatorError("goal_conditioned chain carries no conditioning weights")
        return scalarize(cset.goal_w, cset.answers[0].reward)
    raise EstimatorError(f"unknown estimator mode: {mode!r}")


def score_group(mode: str, csets: list[CandidateSet], *, shared_weights=None,
                chain_weights=None, preset: str = "maze_uniform",
                multi_agg: str = "mean", eps: float = 1e-6) -> AdvantageResult:
    """Advantages for a group of chains rolled out on the same maze."""
    if mode not in MODES:
        raise EstimatorError(f"unknown estimator mode: {mode!r}")
    if len(csets) < 2:
        raise EstimatorError(f"need a group of >= 2 chains, got {len(csets)}")
    if mode == "gdpo":
        for cset in csets:
            _require_single(mode, cset)
        rewards = np.stack([c.answers[0].reward for c in csets])
        return gdpo_advantages(rewards, PRESETS[preset].weights, eps=eps)
    if mode == "random_w":
        if chain_weights is None or len(chain_weights) != len(csets):
            raise EstimatorError("random_w needs one weight draw per chain")
        scores = [score_chain(mode, c, chain_weights=w)
                  for c, w in zip(csets, chain_weights)]
    else:
        scores = [score_chain(mode, c, shared_weights=shared_weights,
                              preset=preset, multi_agg=multi_agg)
                  for c in csets]
    return grpo_advantages(scores, eps=eps)
