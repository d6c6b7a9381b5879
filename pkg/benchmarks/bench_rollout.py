"""Compare the compiled rollout kernel against the pure-Python fallback.

Usage: python3 benchmarks/bench_rollout.py [--mazes 20] [--reps 3] [--hidden 0]

Builds a small imitation-initialized policy so trajectories have realistic
lengths, then times sampled chains on each available backend and checks that
both produce identical trajectories.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from vpomaze.maze_env import make_splits
from vpomaze.policy import get_backend
from vpomaze.policy.rollout import sample_chain
from vpomaze.streams import generator
from vpomaze.trainer import TrainConfig, initial_params


def time_backend(name: str, params, mazes, reps: int) -> tuple[float, int, list]:
    backend = get_backend(name)
    trajs = []
    tokens = 0
    best = float("inf")
    for rep in range(reps):
        t0 = time.perf_counter()
        tok = 0
        rep_trajs = []
        for i, maze in enumerate(mazes):
            rng = generator(0, "bench", i)
            chain = sample_chain(params, maze, rng, maze_id=i,
                                 collect_features=False, kernel=backend)
            for ans in chain.answers:
                tok += ans.n_tokens
                rep_trajs.append((i, ans.actions.tolist(), ans.reward.tolist()))
        best = min(best, time.perf_counter() - t0)
        tokens = tok
        trajs = rep_trajs
    return best, tokens, trajs


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--mazes", type=int, default=20)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--hidden", type=int, default=0)
    ap.add_argument("--m", type=int, default=3)
    args = ap.parse_args()

    mazes, _ = make_splits(args.mazes, 1)
    cfg = TrainConfig(estimator="vpo", total_steps=1, seed=0, m=args.m,
                      hidden=args.hidden)
    params = initial_params(cfg, mazes)

    names = ["python"]
    try:
        get_backend("compiled")
        names.insert(0, "compiled")
    except ImportError:
        print("compiled extension not built; timing the fallback only")

    results = {}
    for name in names:
        secs, tokens, trajs = time_backend(name, params, mazes, args.reps)
        results[name] = (secs, tokens, trajs)
        print(f"{name:>9}: {tokens / secs / 1e3:8.1f} k tokens/s   "
              f"({tokens} tokens in {secs * 1e3:.1f} ms)")

    if len(results) == 2:
        (cs, _, ct), (ps, _, pt) = results["compiled"], results["python"]
        if ct != pt:
            print("MISMATCH: backends produced different trajectories")
            return 1
        print(f"identical trajectories on both backends; speedup {ps / cs:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
