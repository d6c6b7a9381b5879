"""Command-line entry point.

Subcommands: gen (datasets), train, eval, diagnose (candidate-log metrics),
oracle (exact vs Monte Carlo set reward).  Exit codes: 0 success, 1 usage
error, 2 data error (bad files, bad configs, corrupt checkpoints).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from .estimators import EstimatorError
from .eval_harness import (EvalConfig, diversity_l1, evaluate, pools_from_jsonl,
                           rho_bar, write_candidates_jsonl, write_eval_csv)
from .manifest import ManifestError, write_manifest
from .maze_env import (TEST_SEED_START, TRAIN_SEED_START, MazeDataError,
                       load_split, make_splits, save_split)
from .policy import CheckpointError, load_checkpoint
from .reward_geometry import sample_weight_matrix, set_reward_exact
from .streams import generator
from .trainer import ConfigError, TrainError, config_from_json, train

DATA_ERRORS = (MazeDataError, CheckpointError, ConfigError, TrainError,
               EstimatorError, ManifestError, NotImplementedError, ValueError)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_k_list(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"bad k list {text!r}; expected comma-separated integers")
    if not ks:
        raise ValueError("empty k list")
    return ks


def _parse_reward_set(text: str) -> np.ndarray:
    rows = []
    for i, part in enumerate(text.split(";")):
        part = part.strip()
        if not part:
            raise ValueError(f"parse error: empty candidate at position {i}")
        try:
            rows.append([float(x) for x in part.split(",")])
        except ValueError:
            raise ValueError(f"parse error: candidate {i} ({part!r}) is not numeric")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"parse error: mixed dimensions {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def _require_empty(out_dir: str, force: bool) -> None:
    if os.path.isdir(out_dir) and os.listdir(out_dir) and not force:
        raise MazeDataError(
            f"output directory {out_dir} is not empty (use --force to overwrite)")


def cmd_gen(args) -> int:
    _require_empty(args.out, args.force)
    train_mazes, test_mazes = make_splits(args.train, args.test)
    save_split(train_mazes, os.path.join(args.out, "train"))
    save_split(test_mazes, os.path.join(args.out, "test"))
    write_manifest(args.out, "dataset",
                   config={"train": args.train, "test": args.test},
                   seeds=[TRAIN_SEED_START, TEST_SEED_START])
    print(f"wrote {args.train} train + {args.test} test mazes to {args.out}")
    return 0


def cmd_train(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    cfg = config_from_json(text)
    mazes = load_split(args.data, "train")
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    final = train(cfg, mazes, args.out, threads=args.threads,
                  resume=args.resume, log=log)
    write_manifest(args.out, "train", config=asdict(cfg), seeds=[cfg.seed])
    print(f"final checkpoint: {final}")
    return 0


def _mean_row(rows: list[dict], k: int) -> dict:
    group = [r for r in rows if r["k"] == k]
    out = {"method": group[0]["method"], "k": k,
           "n_mazes": group[0]["n_mazes"], "seed": "mean"}
    for col in ("best_prefix", "best_unbiased", "pass", "diversity", "rho_bar"):
        vals = [r[col] for r in group if math.isfinite(r[col])]
        out[col] = float(np.mean(vals)) if vals else float("nan")
    return out


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.ckpt)
    tc = ckpt.train_config
    if not tc or "estimator" not in tc:
        raise CheckpointError(
            f"checkpoint {args.ckpt} lacks a stored train config; "
            "cannot infer the estimator mode")
    mazes = load_split(args.data, args.split)
    ecfg = EvalConfig(mode=tc["estimator"], m=ckpt.params.spec.m,
                      k_list=_parse_k_list(args.k), k_max=args.k_max,
                      temperature=args.temperature,
                      alpha=tc.get("alpha", 1.0),
                      preset=tc.get("preset", "maze_uniform"),
                      seeds=args.seeds)
    rows, pools_by_seed = evaluate(ckpt.params, mazes, ecfg, threads=args.threads)
    if ecfg.seeds > 1:
        rows = rows + [_mean_row(rows, k) for k in ecfg.k_list]
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "eval.csv")
    write_eval_csv(csv_path, rows)
    for seed, pools in sorted(pools_by_seed.items()):
        write_candidates_jsonl(
            os.path.join(args.out, f"candidates_seed{seed}.jsonl"), pools)
    write_manifest(args.out, "eval",
                   config={"ckpt": os.path.basename(args.ckpt),
                           "split": args.split, "k": list(ecfg.k_list),
                           "k_max": ecfg.k_max, "temperature": ecfg.temperature,
                           "mode": ecfg.mode, "m": ecfg.m},
                   seeds=list(range(ecfg.seeds)))
    print(f"wrote {csv_path} ({len(rows)} rows, {len(mazes)} mazes)")
    return 0


def cmd_diagnose(args) -> int:
    pools = pools_from_jsonl(args.pool)
    sizes = [p.size for p in pools]
    stacked = np.concatenate([p.rewards for p in pools])
    div = float(np.mean([diversity_l1(p.rewards) for p in pools]))
    rho = rho_bar(stacked)
    total = int(sum(sizes))
    print(f"pools: {len(pools)} mazes, {min(sizes)}..{max(sizes)} candidates each "
          f"(total {total})")
    print(f"diversity_l1 (mean over mazes): {div:.6f}")
    if math.isnan(rho):
        print("rho_bar: undefined (fewer than 2 varying reward dimensions)")
    else:
        print(f"rho_bar (stacked over mazes): {rho:.6f}")
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("n_mazes,total_candidates,diversity,rho_bar\n")
            fh.write(f"{len(pools)},{total},{repr(div)},{repr(rho)}\n")
        print(f"wrote {args.out}")
    return 0


def cmd_oracle(args) -> int:
    rewards = _parse_reward_set(args.set)
    n, d = rewards.shape
    exact = set_reward_exact(rewards, alpha=args.alpha)
    rng = generator(args.seed, "oracle-mc")
    weights = sample_weight_matrix(rng, args.k, alpha=args.alpha, d=d)
    per_draw = np.max(weights @ rewards.T, axis=1)
    mc = float(per_draw.mean())
    se = float(per_draw.std(ddof=1) / math.sqrt(args.k)) if args.k > 1 else float("nan")
    print(f"set: {n} candidates, d={d}, alpha={args.alpha}")
    print(f"exact: {exact.value!r} (method={exact.method}, "
          f"error_bound={exact.error_bound:.2e})")
    print(f"mc:    {mc!r} +/- {se:.2e} ({args.k} draws, seed {args.seed})")
    if se > 0:
        print(f"|z| = {abs(mc - exact.value) / se:.2f}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="vpomaze",
                     description="Maze testbed for set-reward policy optimization")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("gen", help="generate train/test maze datasets")
    p.add_argument("--train", type=int, default=1000, help="train mazes (default 1000)")
    p.add_argument("--test", type=int, default=100, help="test mazes (default 100)")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--force", action="store_true",
                   help="write into a non-empty directory")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("train", help="train a policy from a JSON config")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--data", required=True, help="dataset directory from gen")
    p.add_argument("--out", required=True, help="run directory for checkpoints/metrics")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")
    p.add_argument("--threads", type=int, default=1, help="rollout threads")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    p.add_argument("--ckpt", required=True, help="checkpoint file")
    p.add_argument("--data", required=True, help="dataset directory from gen")
    p.add_argument("--out", required=True, help="output directory for CSV/JSONL")
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--k", default="3,5,10,30", help="comma-separated k values")
    p.add_argument("--k-max", type=int, default=30, dest="k_max",
                   help="candidate pool size per maze")
    p.add_argument("--seeds", type=int, default=1, help="number of eval seeds")
    p.add_argument("--temperature", type=float, default=0.7)
    p.add_argument("--threads", type=int, default=1, help="pool-building threads")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("diagnose", help="pool metrics from a candidate JSONL log")
    p.add_argument("--pool", required=True, help="candidates JSONL file from eval")
    p.add_argument("--out", default=None, help="optional CSV report path")
    p.set_defaults(fn=cmd_diagnose)

    p = sub.add_parser("oracle", help="exact vs Monte Carlo set reward for a "
                                      "semicolon-separated candidate list")
    p.add_argument("--set", required=True,
                   help='reward vectors like "1,0;0,1" (";" between candidates)')
    p.add_argument("--alpha", type=float, default=1.0, help="Dirichlet alpha")
    p.add_argument("--k", type=int, default=100000, help="Monte Carlo draws")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
