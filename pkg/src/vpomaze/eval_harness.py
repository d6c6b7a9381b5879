"""Pool-based evaluation: best@k, pass@k, diversity, reward correlation.

For each maze the harness samples a pool of k_max answers in draw order
(ceil(k_max/m) chains of m answers, concatenated chain by chain and
truncated to k_max).  Metrics per maze:

  best@k prefix    max gold scalar over the first k answers drawn
  best@k unbiased  order-statistic estimator of E[max of a random
                   k-subset]: sum_j s_(j) C(j-1,k-1)/C(N,k), ascending
  pass@k           1 - C(N-c,k)/C(N,k) with c = number of successes
  diversity        mean pairwise L1 distance between reward vectors of
                   the full pool (k-independent)

rho_bar is global per split: answers from all pools are stacked,
zero-variance reward dimensions dropped, and the mean off-diagonal
Pearson correlation reported.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .estimators import MODES, EstimatorError
from .maze_env import Maze, REWARD_DIM, format_moves
from .policy import PolicyParams, sample_chain
from .reward_geometry import gold_scalar
from .util import ordered_map

__all__ = ["EvalConfig", "MazePool", "build_pool", "best_at_k_prefix",
           "best_at_k_unbiased", "pass_at_k", "diversity_l1", "rho_bar",
           "evaluate", "write_eval_csv", "write_candidates_jsonl",
           "pools_from_jsonl", "rows_from_pools", "EVAL_COLUMNS"]

EVAL_COLUMNS = ("method", "k", "best_prefix", "best_unbiased", "pass",
                "diversity", "rho_bar", "n_mazes", "seed")


@dataclass
class EvalConfig:
    mode: str = "grpo"
    m: int = 1
    k_list: tuple[int, ...] = (3, 5, 10, 30)
    k_max: int = 30
    temperature: float = 0.7
    alpha: float = 1.0
    preset: str = "maze_uniform"
    seeds: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise EstimatorError(f"unknown estimator mode: {self.mode!r}")
        if self.m < 1 or self.k_max < 1 or self.seeds < 1:
            raise EstimatorError("m, k_max, and seeds must be positive")
        if any(k < 1 or k > self.k_max for k in self.k_list):
            raise EstimatorError(f"k values {self.k_list} must lie in 1..k_max={self.k_max}")


@dataclass
class MazePool:
    maze_id: int
    rewards: np.ndarray          # (N, d) in draw order
    scalars: np.ndarray          # (N,) gold scalars
    successes: np.ndarray        # (N,) bool
    moves: list[str] = field(default_factory=list)
    chain_ids: list[int] = field(default_factory=list)
    answer_idx: list[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(self.scalars.size)


def build_pool(params: PolicyParams, maze: Maze, maze_id: int, eval_seed: int,
               cfg: EvalConfig) -> MazePool:
    """Sample one maze's answer pool at the eval temperature."""
    n_chains = -(-cfg.k_max // cfg.m)
    rewards, scalars, successes = [], [], []
    moves, chain_ids, answer_idx = [], [], []
    for chain_id in range(n_chains):
        rng = streams.generator(eval_seed, "eval-rollout", maze_id, chain_id)
        goal_w = None
        if cfg.mode == "goal_conditioned":
            grng = streams.generator(eval_seed, "eval-goal", maze_id, chain_id)
            goal_w = grng.dirichlet(np.full(REWARD_DIM, cfg.alpha))
        cset = sample_chain(params, maze, rng, maze_id=maze_id,
                            temperature=cfg.temperature, goal_w=goal_w,
                            collect_features=False)
        for a_idx, ans in enumerate(cset.answers):
            if len(scalars) >= cfg.k_max:
                break
            rewards.append(ans.reward)
            scalars.append(gold_scalar(ans.reward, cfg.preset))
            successes.append(ans.reached_exit)
            moves.append(format_moves(ans.moves))
            chain_ids.append(chain_id)
            answer_idx.append(a_idx)
    return MazePool(maze_id=maze_id, rewards=np.stack(rewards),
                    scalars=np.asarray(scalars), successes=np.asarray(successes),
                    moves=moves, chain_ids=chain_ids, answer_idx=answer_idx)


def best_at_k_prefix(scalars, k: int) -> float:
    s = np.asarray(scalars, dtype=np.float64)
    if not 1 <= k <= s.size:
        raise ValueError(f"k={k} outside 1..{s.size}")
    return float(s[:k].max())


def best_at_k_unbiased(scalars, k: int) -> float:
    """E[max over a uniformly random size-k subset], computed exactly.

    Each order-statistic weight C(j-1,k-1)/C(N,k) is an exact integer
    ratio; Python big-int division rounds it correctly at any N.
    """
    s = np.sort(np.asarray(scalars, dtype=np.float64))
    n = s.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    denom = math.comb(n, k)
    terms = []
    for j in range(k, n + 1):
        terms.append(s[j - 1] * (math.comb(j - 1, k - 1) / denom))
    return float(math.fsum(terms))


def pass_at_k(successes, k: int) -> float:
    """1 - C(N-c, k)/C(N, k), the unbiased any-success estimator."""
    succ = np.asarray(successes, dtype=bool)
    n = succ.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    c = int(succ.sum())
    return 1.0 - math.comb(n - c, k) / math.comb(n, k)


def diversity_l1(rewards) -> float:
    """Mean pairwise L1 distance between reward vectors."""
    r = np.asarray(rewards, dtype=np.float64)
    n = r.shape[0]
    if n < 2:
        return 0.0
    diffs = np.abs(r[:, None, :] - r[None, :, :]).sum(axis=2)
    return float(diffs.sum() / (n * (n - 1)))


def rho_bar(rewards) -> float:
    """Mean off-diagonal Pearson correlation over non-degenerate dims.

    Returns nan when fewer than two dimensions vary.
    """
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] < 2:
        return float("nan")
    keep = r.std(axis=0) > 0.0
    if int(keep.sum()) < 2:
        return float("nan")
    corr = np.corrcoef(r[:, keep].T)
    d = corr.shape[0]
    return float((corr.sum() - np.trace(corr)) / (d * (d - 1)))


def evaluate(params: PolicyParams, mazes: list[Maze], cfg: EvalConfig,
             threads: int = 1) -> tuple[list[dict], dict[int, list[MazePool]]]:
    """Metric rows over all eval seeds plus the pools per seed."""
    cfg.validate()
    rows: list[dict] = []
    pools_by_seed: dict[int, list[MazePool]] = {}
    for seed in range(cfg.seeds):
        pools = ordered_map(
            lambda im: build_pool(params, im[1], im[0], seed, cfg),
            list(enumerate(mazes)), threads)
        pools_by_seed[seed] = pools
        rows.extend(rows_from_pools(pools, cfg.mode, seed, cfg.k_list))
    return rows, pools_by_seed


def rows_from_pools(pools: list[MazePool], method: str, seed: int,
                    k_list) -> list[dict]:
    stacked = np.concatenate([p.rewards for p in pools])
    rho = rho_bar(stacked)
    div = float(np.mean([diversity_l1(p.rewards) for p in pools]))
    rows = []
    for k in k_list:
        rows.append({
            "method": method,
            "k": int(k),
            "best_prefix": float(np.mean([best_at_k_prefix(p.scalars, k) for p in pools])),
            "best_unbiased": float(np.mean([best_at_k_unbiased(p.scalars, k) for p in pools])),
            "pass": float(np.mean([pass_at_k(p.successes, k) for p in pools])),
            "diversity": div,
            "rho_bar": rho,
            "n_mazes": len(pools),
            "seed": int(seed),
        })
    return rows


def write_eval_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(EVAL_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for col in EVAL_COLUMNS:
                v = row[col]
                cells.append(repr(v) if isinstance(v, float) else str(v))
            fh.write(",".join(cells) + "\n")


def write_candidates_jsonl(path: str, pools: list[MazePool]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for pool in pools:
            for i in range(pool.size):
                fh.write(json.dumps({
                    "maze_id": pool.maze_id,
                    "chain_id": pool.chain_ids[i],
                    "answer_idx": pool.answer_idx[i],
                    "moves": pool.moves[i],
                    "reward": [float(x) for x in pool.rewards[i]],
                    "scalar": float(pool.scalars[i]),
                }, sort_keys=True))
                fh.write("\n")


def pools_from_jsonl(path: str) -> list[MazePool]:
    """Rebuild pools from a candidate log (for offline diagnosis)."""
    by_maze: dict[int, list[dict]] = {}
    with open(path, encoding="ascii") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                for field_name in ("maze_id", "chain_id", "answer_idx", "moves",
                                   "reward", "scalar"):
                    if field_name not in row:
                        raise KeyError(field_name)
                if len(row["reward"]) < 1:
                    raise ValueError("empty reward vector")
                by_maze.setdefault(int(row["maze_id"]), []).append(row)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad candidate row: {exc}") from None
    pools = []
    for maze_id in sorted(by_maze):
        entries = by_maze[maze_id]
        rewards = np.asarray([e["reward"] for e in entries], dtype=np.float64)
        pools.append(MazePool(
            maze_id=maze_id,
            rewards=rewards,
            scalars=np.asarray([e["scalar"] for e in entries], dtype=np.float64),
            successes=rewards[:, 0] >= 1.0,
            moves=[e["moves"] for e in entries],
            chain_ids=[int(e["chain_id"]) for e in entries],
            answer_idx=[int(e["answer_idx"]) for e in entries],
        ))
    return pools
