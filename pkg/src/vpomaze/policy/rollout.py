"""Chain sampling and log-prob/gradient evaluation on top of the kernel.

A chain is m answers sampled sequentially on one maze; answer i's context
row carries its index and the reward vectors of answers 0..i-1.  Each
answer pre-draws a fixed budget-sized block of uniforms from its stream,
so RNG consumption does not depend on trajectory length and rollouts can
be scheduled in any order or thread without changing results.
"""

from dataclasses import dataclass

import numpy as np

from ..maze_env import (
    MOVE_DELTAS,
    Maze,
    N_ACTIONS,
    REWARD_DIM,
    SIZE,
    STOP,
    WALL,
)
from . import backend
from .features import FeatureSpec, static_context_row, write_dynamic_slots
from .params import PolicyParams

__all__ = ["AnswerRecord", "CandidateSet", "sample_chain", "greedy_chain",
           "replay_features", "chain_logps", "chain_logps_and_grad"]


@dataclass
class AnswerRecord:
    """One sampled answer: tokens, cached features, and episode outcome."""

    actions: np.ndarray          # int8 (T,), moves plus optional trailing STOP
    logps: np.ndarray            # float64 (T,), at the sampling temperature
    features: np.ndarray | None  # float64 (T, F) cached rows, or None
    reward: np.ndarray           # float64 (d,)
    reached_exit: bool
    gold: int
    diamonds: int
    lava: int
    steps_used: int
    visited: np.ndarray          # int16 cell ids, start included

    @property
    def moves(self) -> np.ndarray:
        return self.actions[self.actions != STOP]

    @property
    def n_tokens(self) -> int:
        return int(self.actions.size)


@dataclass
class CandidateSet:
    """One chain of m answers on one maze."""

    maze_id: int
    answers: list[AnswerRecord]
    temperature: float
    goal_w: np.ndarray | None = None

    @property
    def m(self) -> int:
        return len(self.answers)

    def rewards(self) -> np.ndarray:
        return np.stack([a.reward for a in self.answers])

    def total_tokens(self) -> int:
        return sum(a.n_tokens for a in self.answers)


_EMPTY_MAT = np.zeros((0, 0))
_EMPTY_VEC = np.zeros(0)


def _kernel_weights(params: PolicyParams):
    if params.hidden == 0:
        return _EMPTY_MAT, params.arrays["w_out"], _EMPTY_VEC
    return params.arrays["w_in"], params.arrays["w_out"], params.arrays["b_out"]


def _answer_reward(maze: Maze, reached: bool, gold: int, diamonds: int, lava: int) -> np.ndarray:
    r = np.zeros(REWARD_DIM)
    if reached:
        r[0] = 1.0
        r[1] = gold / maze.n_gold
        r[2] = diamonds / maze.n_diamond
        r[3] = 1.0 - lava / maze.n_lava
    return r


def sample_chain(params: PolicyParams, maze: Maze, rng: np.random.Generator | None,
                 maze_id: int = 0, temperature: float = 1.0,
                 goal_w: np.ndarray | None = None, greedy: bool = False,
                 collect_features: bool = True,
                 kernel=None) -> CandidateSet:
    """Sample one m-answer chain (m comes from the feature spec)."""
    spec = params.spec
    w_in, w_out, b_out = _kernel_weights(params)
    rollout = (kernel or backend).rollout_answer
    budget = maze.budget
    feats = np.zeros((budget, spec.length))
    actions = np.zeros(budget, dtype=np.int8)
    logps = np.zeros(budget)
    visited = np.zeros(budget + 1, dtype=np.int16)
    zeros_u = np.zeros(budget)

    answers: list[AnswerRecord] = []
    prior: list[np.ndarray] = []
    for a_idx in range(spec.m):
        static_row = static_context_row(spec, a_idx, prior, goal_w)
        uniforms = zeros_u if greedy else rng.random(budget)
        t, steps, reached, gold, diamonds, lava, nv = rollout(
            maze.grid, maze.start[0], maze.start[1], maze.exit[0], maze.exit[1],
            maze.n_gold, maze.n_diamond, maze.n_lava, budget,
            w_in, w_out, b_out, params.hidden,
            static_row, temperature, greedy,
            uniforms, feats, actions, logps, visited,
        )
        reward = _answer_reward(maze, reached, gold, diamonds, lava)
        answers.append(AnswerRecord(
            actions=actions[:t].copy(),
            logps=logps[:t].copy(),
            features=feats[:t].copy() if collect_features else None,
            reward=reward,
            reached_exit=reached,
            gold=gold, diamonds=diamonds, lava=lava,
            steps_used=steps,
            visited=visited[:nv].copy(),
        ))
        prior.append(reward)
    return CandidateSet(maze_id=maze_id, answers=answers,
                        temperature=temperature, goal_w=goal_w)


def greedy_chain(params: PolicyParams, maze: Maze, maze_id: int = 0,
                 goal_w: np.ndarray | None = None, temperature: float = 1.0,
                 collect_features: bool = False) -> CandidateSet:
    return sample_chain(params, maze, None, maze_id=maze_id, temperature=temperature,
                        goal_w=goal_w, greedy=True, collect_features=collect_features)


def replay_features(spec: FeatureSpec, maze: Maze, cset: CandidateSet,
                    answer_index: int) -> np.ndarray:
    """Rebuild the (T, F) feature rows of a recorded answer by replay."""
    ans = cset.answers[answer_index]
    prior = [cset.answers[j].reward for j in range(answer_index)]
    static_row = static_context_row(spec, answer_index, prior, cset.goal_w)
    rows = np.zeros((ans.n_tokens, spec.length))
    consumed = np.zeros(SIZE * SIZE, dtype=np.uint8)
    r, c = maze.start
    gold = diamonds = lava = steps = 0
    for t, a in enumerate(ans.actions):
        rows[t] = static_row
        write_dynamic_slots(rows[t], maze, r, c, steps, gold, diamonds, lava, consumed)
        a = int(a)
        if a == STOP:
            break
        dr, dc = MOVE_DELTAS[a]
        nr, nc = r + dr, c + dc
        if 0 <= nr < SIZE and 0 <= nc < SIZE and maze.grid[nr, nc] != WALL:
            r, c = nr, nc
        steps += 1
        g = int(maze.grid[r, c])
        if not consumed[r * SIZE + c] and g in (4, 5, 6):
            consumed[r * SIZE + c] = 1
            if g == 4:
                gold += 1
            elif g == 5:
                diamonds += 1
            else:
                lava += 1
    return rows


def _answer_features(params: PolicyParams, maze: Maze, cset: CandidateSet, i: int) -> np.ndarray:
    feats = cset.answers[i].features
    if feats is None:
        feats = replay_features(params.spec, maze, cset, i)
    return feats


def _forward(params: PolicyParams, feats: np.ndarray, temperature: float):
    """Returns (logp rows, probs, hidden activations or None)."""
    if params.hidden == 0:
        logits = feats @ params.arrays["w_out"].T
        hidden_act = None
    else:
        hidden_act = np.tanh(feats @ params.arrays["w_in"].T)
        logits = hidden_act @ params.arrays["w_out"].T + params.arrays["b_out"]
    scaled = logits / temperature
    scaled -= scaled.max(axis=1, keepdims=True)
    expz = np.exp(scaled)
    norm = expz.sum(axis=1, keepdims=True)
    logp = scaled - np.log(norm)
    return logp, expz / norm, hidden_act


def chain_logps(params: PolicyParams, maze: Maze, cset: CandidateSet) -> list[np.ndarray]:
    """Per-answer token log-probs of the recorded actions under params."""
    out = []
    for i, ans in enumerate(cset.answers):
        if ans.n_tokens == 0:
            out.append(np.zeros(0))
            continue
        feats = _answer_features(params, maze, cset, i)
        logp, _, _ = _forward(params, feats, cset.temperature)
        out.append(logp[np.arange(ans.n_tokens), ans.actions.astype(np.int64)])
    return out


def chain_logps_and_grad(params: PolicyParams, maze: Maze, cset: CandidateSet,
                         coefs: list[np.ndarray]):
    """Token log-probs plus the gradient of sum_t coef_t * logp_t.

    coefs holds one float array per answer, aligned with its tokens.  The
    gradient comes back as a flat vector in the canonical parameter order.
    """
    grads = {k: np.zeros_like(v) for k, v in params.arrays.items()}
    logps_out: list[np.ndarray] = []
    inv_t = 1.0 / cset.temperature
    for i, ans in enumerate(cset.answers):
        n = ans.n_tokens
        if n == 0:
            logps_out.append(np.zeros(0))
            continue
        feats = _answer_features(params, maze, cset, i)
        logp, probs, hidden_act = _forward(params, feats, cset.temperature)
        acts = ans.actions.astype(np.int64)
        logps_out.append(logp[np.arange(n), acts])
        dlogits = -probs
        dlogits[np.arange(n), acts] += 1.0
        dlogits *= (coefs[i] * inv_t)[:, None]
        if params.hidden == 0:
            grads["w_out"] += dlogits.T @ feats
        else:
            grads["w_out"] += dlogits.T @ hidden_act
            grads["b_out"] += dlogits.sum(axis=0)
            dh = (dlogits @ params.arrays["w_out"]) * (1.0 - hidden_act * hidden_act)
            grads["w_in"] += dh.T @ feats
    flat = np.concatenate([grads[k].ravel() for k in params.names()])
    return logps_out, flat
