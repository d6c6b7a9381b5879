"""Policy-gradient training loop.

One step: sample a maze batch, roll out G chains per maze, score them
with the configured estimator, z-score within groups, and ascend the
clipped-ratio objective

    J = (1/T_tot) sum_tokens [ surrogate(rho, A) - beta * k3 ]

where rho is the new/old probability ratio, the surrogate is PPO-clip
with a dual clip floor c*A for negative advantages, k3 is the
exp(delta) - delta - 1 estimator of KL against the frozen initial policy
(delta = logp_ref - logp_new), and T_tot counts every token in the batch
(token-mean aggregation).  A single optimization epoch runs per batch.
AdamW with decoupled weight decay and a global-norm gradient clip applied
before the moment updates.

All randomness is keyed by (seed, purpose, step, indices), so runs are
bit-reproducible for any thread count, and resuming from a checkpoint
replays the remaining steps exactly.
"""

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import streams
from .estimators import MODES, SINGLE_ANSWER_MODES, score_group
from .maze_env import MOVE_DELTAS, Maze, REWARD_DIM, SIZE, WALL, shortest_path_moves
from .policy import (
    AdamState,
    FeatureSpec,
    PolicyParams,
    chain_logps,
    chain_logps_and_grad,
    greedy_chain,
    load_checkpoint,
    sample_chain,
    save_checkpoint,
    static_context_row,
)
from .policy.features import write_dynamic_slots
from .reward_geometry import PRESETS, gold_scalar, sample_weight_matrix
from .util import ordered_map

__all__ = ["TrainConfig", "TrainError", "ConfigError", "config_from_json",
           "imitation_init", "initial_params", "train", "train_step",
           "TrainState", "adam_update", "METRICS_COLUMNS"]

METRICS_COLUMNS = ("step", "mean_score", "kl", "grad_norm",
                   "adv_mean", "adv_std", "greedy_eval_score")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
WEIGHT_DECAY = 0.01
GRAD_CLIP = 1.0


class TrainError(RuntimeError):
    """Training diverged or hit an unrecoverable numeric state."""


class ConfigError(ValueError):
    """Bad training configuration."""


@dataclass
class TrainConfig:
    estimator: str
    total_steps: int
    seed: int
    group_size: int = 8
    m: int = 1
    k_weight_draws: int = 128
    batch_size: int = 8
    learning_rate: float = 0.04
    clip_eps: float = 0.2
    dual_clip: float = 3.0
    kl_beta: float = 1e-3
    adv_eps: float = 1e-6
    temperature: float = 1.0
    alpha: float = 1.0
    hidden: int = 0
    init: str = "imitation"
    init_steps: int = 150
    init_lr: float = 0.2
    init_batch: int = 1024
    multi_rlvr_agg: str = "mean"
    preset: str = "maze_uniform"
    eval_every: int = 25
    eval_mazes: int = 8
    checkpoint_every: int = 500

    def validate(self) -> None:
        if self.estimator not in MODES:
            raise ConfigError(f"unknown estimator {self.estimator!r}, "
                              f"expected one of {', '.join(MODES)}")
        if self.estimator in SINGLE_ANSWER_MODES and self.m != 1:
            raise ConfigError(f"estimator {self.estimator} requires m=1, got m={self.m}")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.group_size < 2:
            raise ConfigError("group_size must be >= 2 (advantages are group-relative)")
        if self.total_steps < 0:
            raise ConfigError("total_steps must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.k_weight_draws < 1:
            raise ConfigError("k_weight_draws must be >= 1")
        if not 0.0 < self.temperature:
            raise ConfigError("temperature must be positive")
        if self.init not in ("imitation", "zeros"):
            raise ConfigError(f"init must be 'imitation' or 'zeros', got {self.init!r}")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown scalar preset {self.preset!r}")
        if self.multi_rlvr_agg not in ("mean", "max"):
            raise ConfigError("multi_rlvr_agg must be 'mean' or 'max'")
        if not 0 <= self.hidden <= 128:
            raise ConfigError("hidden must be in 0..128")
        if self.dual_clip <= 1.0:
            raise ConfigError("dual_clip must exceed 1")


REQUIRED_CONFIG_KEYS = ("estimator", "total_steps", "seed")


def config_from_json(text: str) -> TrainConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = set(TrainConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in REQUIRED_CONFIG_KEYS:
        if key not in data:
            raise ConfigError(f"missing config key: {key}")
    cfg = TrainConfig(**data)
    cfg.validate()
    return cfg


@dataclass
class TrainState:
    params: PolicyParams
    reference: PolicyParams
    adam: AdamState
    step: int = 0


def adam_update(params: PolicyParams, adam: AdamState, grad: np.ndarray,
                lr: float) -> PolicyParams:
    """One AdamW step (decoupled weight decay, global clip already applied)."""
    adam.t += 1
    adam.m = ADAM_BETA1 * adam.m + (1.0 - ADAM_BETA1) * grad
    adam.v = ADAM_BETA2 * adam.v + (1.0 - ADAM_BETA2) * grad * grad
    mhat = adam.m / (1.0 - ADAM_BETA1 ** adam.t)
    vhat = adam.v / (1.0 - ADAM_BETA2 ** adam.t)
    flat = params.flatten()
    flat = flat - lr * (mhat / (np.sqrt(vhat) + ADAM_EPS)) - lr * WEIGHT_DECAY * flat
    return params.with_flat(flat)


def _clip_grad(grad: np.ndarray, max_norm: float) -> tuple[np.ndarray, float]:
    norm = float(np.linalg.norm(grad))
    if norm > max_norm:
        grad = grad * (max_norm / norm)
    return grad, norm


def imitation_routes(maze: Maze) -> list[tuple[int, ...]]:
    """Three oracle demonstrations: lava-avoiding direct, via the gold
    corner, via the diamond corner.  All fit the budget by construction."""
    direct = shortest_path_moves(maze.grid, maze.start, maze.exit, avoid_lava=True)
    via_gold = (shortest_path_moves(maze.grid, maze.start, maze.gold_corner)
                + shortest_path_moves(maze.grid, maze.gold_corner, maze.exit))
    via_diam = (shortest_path_moves(maze.grid, maze.start, maze.diamond_corner)
                + shortest_path_moves(maze.grid, maze.diamond_corner, maze.exit))
    return [direct, via_gold, via_diam]


def imitation_init(cfg: TrainConfig, mazes: list[Maze]) -> PolicyParams:
    """Behavior-clone the oracle routes into a fresh policy.

    Answer indices rotate over (maze, route) pairs so every context slot
    sees every route shape; prior-reward and conditioning slots stay zero,
    which leaves their weights untouched at zero.  No STOP examples: the
    cloned policy ends answers by reaching the exit.
    """
    spec = FeatureSpec(m=cfg.m, d=REWARD_DIM)
    params = initial_params_random(cfg, spec)
    rows = []
    labels = []
    zero_priors_cache = {a: [np.zeros(REWARD_DIM)] * a for a in range(cfg.m)}
    for i, maze in enumerate(mazes):
        for j, route in enumerate(imitation_routes(maze)):
            a_idx = (i + j) % cfg.m
            static = static_context_row(spec, a_idx, zero_priors_cache[a_idx])
            feats = _route_features(spec, maze, static, route)
            rows.append(feats)
            labels.append(np.asarray(route, dtype=np.int64))
    x = np.concatenate(rows)
    y = np.concatenate(labels)

    rng = streams.generator(cfg.seed, "imitation")
    adam = AdamState.zeros(params.n_params)
    n = x.shape[0]
    for _ in range(cfg.init_steps):
        idx = rng.integers(0, n, size=min(cfg.init_batch, n))
        grad = _cross_entropy_grad(params, x[idx], y[idx])
        grad, _ = _clip_grad(grad, GRAD_CLIP)
        params = adam_update(params, adam, grad, cfg.init_lr)
    return params


def _route_features(spec: FeatureSpec, maze: Maze, static_row: np.ndarray,
                    route) -> np.ndarray:
    """Feature rows seen while executing a move route (for cloning)."""
    rows = np.zeros((len(route), spec.length))
    consumed = np.zeros(SIZE * SIZE, dtype=np.uint8)
    r, c = maze.start
    gold = diamonds = lava = steps = 0
    for t, a in enumerate(route):
        rows[t] = static_row
        write_dynamic_slots(rows[t], maze, r, c, steps, gold, diamonds, lava, consumed)
        dr, dc = MOVE_DELTAS[int(a)]
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


def _cross_entropy_grad(params: PolicyParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Mean softmax cross-entropy gradient over a labeled batch."""
    n = x.shape[0]
    if params.hidden == 0:
        logits = x @ params.arrays["w_out"].T
        hidden_act = None
    else:
        hidden_act = np.tanh(x @ params.arrays["w_in"].T)
        logits = hidden_act @ params.arrays["w_out"].T + params.arrays["b_out"]
    logits -= logits.max(axis=1, keepdims=True)
    expz = np.exp(logits)
    probs = expz / expz.sum(axis=1, keepdims=True)
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    grads = {}
    if params.hidden == 0:
        grads["w_out"] = dlogits.T @ x
    else:
        grads["w_out"] = dlogits.T @ hidden_act
        grads["b_out"] = dlogits.sum(axis=0)
        dh = (dlogits @ params.arrays["w_out"]) * (1.0 - hidden_act * hidden_act)
        grads["w_in"] = dh.T @ x
    return np.concatenate([grads[k].ravel() for k in params.names()])


def initial_params_random(cfg: TrainConfig, spec: FeatureSpec) -> PolicyParams:
    """Zero policy; with a hidden layer, w_in gets a small deterministic
    random init (an all-zero tanh network has no gradient path)."""
    params = PolicyParams.zeros(spec, hidden=cfg.hidden)
    if cfg.hidden > 0:
        rng = streams.generator(cfg.seed, "mlp-init")
        params.arrays["w_in"][:] = rng.normal(0.0, 1.0 / np.sqrt(spec.length),
                                              params.arrays["w_in"].shape)
    return params


def initial_params(cfg: TrainConfig, mazes: list[Maze]) -> PolicyParams:
    if cfg.init == "imitation":
        return imitation_init(cfg, mazes)
    return initial_params_random(cfg, FeatureSpec(m=cfg.m, d=REWARD_DIM))


def _surrogate_coefs(logp_new: np.ndarray, logp_old: np.ndarray, adv: float,
                     clip_eps: float, dual_clip: float):
    """Per-token objective values and d(objective)/d(logp_new)."""
    rho = np.exp(logp_new - logp_old)
    unclipped = rho * adv
    clipped = np.clip(rho, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    core = np.minimum(unclipped, clipped)
    take_unclipped = unclipped <= clipped
    coef = np.where(take_unclipped, unclipped, 0.0)
    obj = core
    if adv < 0.0:
        floor = dual_clip * adv
        floored = floor > core
        obj = np.where(floored, floor, core)
        coef = np.where(floored, 0.0, coef)
    return obj, coef


@dataclass
class StepMetrics:
    step: int
    mean_score: float
    kl: float
    grad_norm: float
    adv_mean: float
    adv_std: float
    objective: float = 0.0


def train_step(state: TrainState, mazes: list[Maze], cfg: TrainConfig,
               step: int, threads: int = 1) -> StepMetrics:
    """One rollout/score/update step; mutates state in place."""
    goal_mode = cfg.estimator == "goal_conditioned"
    batch = min(cfg.batch_size, len(mazes))
    rng_batch = streams.generator(cfg.seed, "batch", step)
    maze_idx = rng_batch.choice(len(mazes), size=batch, replace=False)

    def roll(unit):
        bi, g = unit
        maze = mazes[maze_idx[bi]]
        rng = streams.generator(cfg.seed, "rollout", step, bi, g)
        goal_w = None
        if goal_mode:
            grng = streams.generator(cfg.seed, "goal-weights", step, bi, g)
            goal_w = grng.dirichlet(np.full(REWARD_DIM, cfg.alpha))
        return sample_chain(state.params, maze, rng, maze_id=int(maze_idx[bi]),
                            temperature=cfg.temperature, goal_w=goal_w)

    units = [(bi, g) for bi in range(batch) for g in range(cfg.group_size)]
    flat = ordered_map(roll, units, threads)
    groups = [flat[bi * cfg.group_size:(bi + 1) * cfg.group_size] for bi in range(batch)]

    group_adv = []
    for bi, group in enumerate(groups):
        shared_w = None
        chain_ws = None
        if cfg.estimator == "vpo":
            wrng = streams.generator(cfg.seed, "set-weights", step, bi)
            shared_w = sample_weight_matrix(wrng, cfg.k_weight_draws,
                                            alpha=cfg.alpha, d=REWARD_DIM)
        elif cfg.estimator == "random_w":
            wrng = streams.generator(cfg.seed, "pref-weights", step, bi)
            chain_ws = wrng.dirichlet(np.full(REWARD_DIM, cfg.alpha),
                                      size=cfg.group_size)
        group_adv.append(score_group(cfg.estimator, group, shared_weights=shared_w,
                                     chain_weights=chain_ws, preset=cfg.preset,
                                     multi_agg=cfg.multi_rlvr_agg, eps=cfg.adv_eps))

    t_tot = sum(c.total_tokens() for c in flat)
    if t_tot == 0:
        raise TrainError(f"step {step}: empty batch (no tokens sampled)")

    grad = np.zeros(state.params.n_params)
    kl_sum = 0.0
    obj_sum = 0.0
    for bi, group in enumerate(groups):
        adv_vec = group_adv[bi].advantages
        maze = mazes[maze_idx[bi]]
        for g, cset in enumerate(group):
            adv = float(adv_vec[g])
            new_logps = chain_logps(state.params, maze, cset)
            ref_logps = chain_logps(state.reference, maze, cset)
            coefs = []
            for ans, lp_new, lp_ref in zip(cset.answers, new_logps, ref_logps):
                obj, coef = _surrogate_coefs(lp_new, ans.logps, adv,
                                             cfg.clip_eps, cfg.dual_clip)
                delta = lp_ref - lp_new
                k3 = np.expm1(delta) - delta
                kl_sum += float(k3.sum())
                obj_sum += float(obj.sum() - cfg.kl_beta * k3.sum())
                coefs.append((coef + cfg.kl_beta * np.expm1(delta)) / t_tot)
            _, chain_grad = chain_logps_and_grad(state.params, maze, cset, coefs)
            grad += chain_grad

    objective = obj_sum / t_tot
    if not np.isfinite(objective) or not np.all(np.isfinite(grad)):
        raise TrainError(
            f"step {step}: non-finite objective ({objective}) or gradient "
            f"(|g|={np.linalg.norm(grad)}); estimator={cfg.estimator} lr={cfg.learning_rate}")

    ascent, norm = _clip_grad(grad, GRAD_CLIP)
    state.params = adam_update(state.params, state.adam, -ascent, cfg.learning_rate)
    state.step = step

    all_adv = np.concatenate([g.advantages for g in group_adv])
    return StepMetrics(
        step=step,
        mean_score=float(np.mean([g.score_mean for g in group_adv])),
        kl=kl_sum / t_tot,
        grad_norm=norm,
        adv_mean=float(all_adv.mean()),
        adv_std=float(all_adv.std()),
        objective=objective,
    )


def greedy_eval_score(params: PolicyParams, mazes: list[Maze], cfg: TrainConfig) -> float:
    """Mean best-answer gold scalar of greedy chains on held-in mazes."""
    scores = []
    for maze in mazes[:cfg.eval_mazes]:
        goal_w = None
        if cfg.estimator == "goal_conditioned":
            goal_w = np.full(REWARD_DIM, 1.0 / REWARD_DIM)
        cset = greedy_chain(params, maze, goal_w=goal_w)
        scores.append(max(gold_scalar(a.reward, cfg.preset) for a in cset.answers))
    return float(np.mean(scores))


def _format_row(metrics: StepMetrics, eval_score: float) -> list[str]:
    vals = (metrics.step, metrics.mean_score, metrics.kl, metrics.grad_norm,
            metrics.adv_mean, metrics.adv_std, eval_score)
    return [repr(v) if isinstance(v, float) else str(v) for v in vals]


def train(cfg: TrainConfig, mazes: list[Maze], out_dir: str, threads: int = 1,
          resume: str | None = None, log=None) -> str:
    """Run the training loop; returns the final checkpoint path.

    Writes metrics.csv (one row per step), checkpoint_init.json, periodic
    checkpoint_NNNNN.json, and checkpoint_final.json under out_dir.  With
    resume=<checkpoint path>, continues from its step; the remaining steps
    replay exactly as an uninterrupted run would have.
    """
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, "metrics.csv")
    cfg_dict = asdict(cfg)

    if resume is None:
        params = initial_params(cfg, mazes)
        state = TrainState(params=params, reference=params.copy(),
                           adam=AdamState.zeros(params.n_params), step=0)
        save_checkpoint(os.path.join(out_dir, "checkpoint_init.json"),
                        state.params, adam=state.adam, step=0,
                        reference=state.reference, train_config=cfg_dict)
        kept_rows: list[list[str]] = []
        last_eval = float("nan")
    else:
        ckpt = load_checkpoint(resume)
        if ckpt.train_config != cfg_dict:
            raise ConfigError(
                "resume checkpoint was trained with a different config; "
                f"stored {ckpt.train_config} vs given {cfg_dict}")
        if ckpt.adam is None or ckpt.reference is None:
            raise ConfigError("resume checkpoint lacks optimizer or reference state")
        state = TrainState(params=ckpt.params, reference=ckpt.reference,
                           adam=ckpt.adam, step=ckpt.step)
        kept_rows, last_eval = _read_metrics_rows(metrics_path, ckpt.step)

    with open(metrics_path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for row in kept_rows:
            writer.writerow(row)
        fh.flush()
        for step in range(state.step + 1, cfg.total_steps + 1):
            metrics = train_step(state, mazes, cfg, step, threads=threads)
            if step == 1 or step % cfg.eval_every == 0:
                last_eval = greedy_eval_score(state.params, mazes, cfg)
            writer.writerow(_format_row(metrics, last_eval))
            fh.flush()
            if log is not None and (step == 1 or step % cfg.eval_every == 0):
                log(f"step {step}/{cfg.total_steps} score={metrics.mean_score:.4f} "
                    f"kl={metrics.kl:.2e} eval={last_eval:.4f}")
            if cfg.checkpoint_every and step % cfg.checkpoint_every == 0 \
                    and step != cfg.total_steps:
                save_checkpoint(os.path.join(out_dir, f"checkpoint_{step:05d}.json"),
                                state.params, adam=state.adam, step=step,
                                reference=state.reference, train_config=cfg_dict)
    final_path = os.path.join(out_dir, "checkpoint_final.json")
    save_checkpoint(final_path, state.params, adam=state.adam, step=state.step,
                    reference=state.reference, train_config=cfg_dict)
    return final_path


def _read_metrics_rows(path: str, keep_until: int) -> tuple[list[list[str]], float]:
    """Rows with step <= keep_until from an existing metrics file, plus the
    last carried greedy eval score."""
    if not os.path.exists(path):
        raise ConfigError(f"resume needs the existing metrics file at {path}")
    rows = []
    last_eval = float("nan")
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != METRICS_COLUMNS:
            raise ConfigError(f"metrics file {path} has unexpected header {header}")
        for row in reader:
            if int(row[0]) <= keep_until:
                rows.append(row)
                last_eval = float(row[-1])
    return rows, last_eval
