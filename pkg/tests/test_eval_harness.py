"""best@k / pass@k estimators, diversity, correlation, and pool plumbing."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpomaze.estimators import EstimatorError
from vpomaze.eval_harness import (
    EVAL_COLUMNS,
    EvalConfig,
    MazePool,
    best_at_k_prefix,
    best_at_k_unbiased,
    build_pool,
    diversity_l1,
    evaluate,
    pass_at_k,
    pools_from_jsonl,
    rho_bar,
    rows_from_pools,
    write_candidates_jsonl,
    write_eval_csv,
)
from vpomaze.maze_env import Maze, generate_maze
from vpomaze.streams import generator
from vpomaze.trainer import TrainConfig, initial_params


def subset_mean_max(scores, k):
    """Exact E[max over uniform k-subset] by full enumeration (N <= 8)."""
    subs = list(itertools.combinations(scores, k))
    return sum(max(s) for s in subs) / len(subs)


def subset_pass(successes, k):
    subs = list(itertools.combinations(successes, k))
    return sum(any(s) for s in subs) / len(subs)


class TestOrderStatistics:
    def test_unbiased_matches_enumeration(self):
        rng = generator(0, "t-enum")
        for _ in range(200):
            n = int(rng.integers(1, 9))
            scores = rng.random(n)
            for k in range(1, n + 1):
                got = best_at_k_unbiased(scores, k)
                want = subset_mean_max(scores.tolist(), k)
                assert got == pytest.approx(want, abs=1e-12)

    def test_pass_matches_enumeration(self):
        rng = generator(1, "t-pass")
        for _ in range(200):
            n = int(rng.integers(1, 9))
            succ = rng.random(n) < 0.4
            for k in range(1, n + 1):
                got = pass_at_k(succ, k)
                want = subset_pass(succ.tolist(), k)
                assert got == pytest.approx(want, abs=1e-12)

    def test_k_equals_n_is_max(self):
        scores = [0.3, 0.9, 0.1]
        assert best_at_k_prefix(scores, 3) == 0.9
        assert best_at_k_unbiased(scores, 3) == pytest.approx(0.9, abs=1e-15)

    def test_prefix_definition(self):
        scores = [0.5, 0.2, 0.9, 0.1]
        assert best_at_k_prefix(scores, 1) == 0.5
        assert best_at_k_prefix(scores, 2) == 0.5
        assert best_at_k_prefix(scores, 3) == 0.9

    def test_prefix_monotone(self):
        rng = generator(2, "t-prefix")
        scores = rng.random(12)
        vals = [best_at_k_prefix(scores, k) for k in range(1, 13)]
        assert vals == sorted(vals)

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=2, max_size=8),
           st.integers(1, 8))
    @settings(max_examples=60, deadline=None)
    def test_unbiased_permutation_invariant(self, scores, k):
        if k > len(scores):
            k = len(scores)
        a = best_at_k_unbiased(scores, k)
        b = best_at_k_unbiased(list(reversed(scores)), k)
        assert a == pytest.approx(b, abs=1e-12)

    def test_large_pool_no_overflow(self):
        # binomial ratios stay exact well past float range
        scores = np.linspace(0, 1, 500)
        got = best_at_k_unbiased(scores, 50)
        assert 0.9 < got <= 1.0

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            best_at_k_unbiased([1.0], 2)
        with pytest.raises(ValueError):
            pass_at_k([True], 0)


class TestPoolMetrics:
    def test_diversity_oracle(self):
        rng = generator(3, "t-div")
        r = rng.random((6, 4))
        want = np.mean([np.abs(r[i] - r[j]).sum()
                        for i in range(6) for j in range(6) if i != j])
        assert diversity_l1(r) == pytest.approx(float(want), abs=1e-12)

    def test_diversity_zero_iff_identical(self):
        r = np.tile(np.array([0.2, 0.4, 0.1, 0.9]), (5, 1))
        assert diversity_l1(r) == 0.0
        r2 = r.copy()
        r2[0, 0] += 0.5
        assert diversity_l1(r2) > 0.0

    def test_diversity_permutation_invariant(self):
        rng = generator(4, "t-perm")
        r = rng.random((7, 4))
        assert diversity_l1(r) == pytest.approx(
            diversity_l1(r[::-1]), abs=1e-12)

    def test_rho_collinear(self):
        base = np.linspace(0, 1, 30)
        r = np.stack([base, 2 * base], axis=1)
        assert rho_bar(r) == pytest.approx(1.0, abs=1e-9)

    def test_rho_anticorrelated(self):
        base = np.linspace(0, 1, 30)
        r = np.stack([base, 1.0 - base], axis=1)
        assert rho_bar(r) == pytest.approx(-1.0, abs=1e-9)

    def test_rho_drops_constant_dims(self):
        base = np.linspace(0, 1, 30)
        r = np.stack([base, np.full(30, 0.5), 2 * base], axis=1)
        assert rho_bar(r) == pytest.approx(1.0, abs=1e-9)

    def test_rho_undefined_when_one_dim_varies(self):
        base = np.linspace(0, 1, 30)
        r = np.stack([base, np.zeros(30)], axis=1)
        assert math.isnan(rho_bar(r))

    def test_rho_affine_invariant(self):
        rng = generator(5, "t-aff")
        r = rng.random((40, 4))
        moved = r * np.array([2.0, 5.0, 0.5, 9.0]) + np.array([1, 2, 3, 4.0])
        assert rho_bar(moved) == pytest.approx(rho_bar(r), abs=1e-9)

    def test_rho_independent_dims_near_zero(self):
        rng = generator(6, "t-ind")
        r = rng.random((10_000, 3))
        assert abs(rho_bar(r)) < 0.05


def some_mazes(n):
    out, seed = [], 0
    while len(out) < n:
        got = generate_maze(seed)
        if isinstance(got, Maze):
            out.append(got)
        seed += 1
    return out


MAZES = some_mazes(4)
PARAMS = initial_params(
    TrainConfig(estimator="vpo", total_steps=1, seed=0, m=3, init_steps=40),
    MAZES)


class TestPools:
    def test_build_pool_shape(self):
        cfg = EvalConfig(mode="vpo", m=3, k_list=(3,), k_max=10)
        pool = build_pool(PARAMS, MAZES[0], 0, 0, cfg)
        assert pool.size == 10
        assert pool.rewards.shape == (10, 4)
        assert len(pool.moves) == 10
        # ceil(10/3) = 4 chains, truncated to k_max in draw order
        assert pool.chain_ids == [0, 0, 0, 1, 1, 1, 2, 2, 2, 3]
        assert pool.answer_idx == [0, 1, 2, 0, 1, 2, 0, 1, 2, 0]

    def test_build_pool_deterministic(self):
        cfg = EvalConfig(mode="vpo", m=3, k_list=(3,), k_max=6)
        a = build_pool(PARAMS, MAZES[0], 0, 0, cfg)
        b = build_pool(PARAMS, MAZES[0], 0, 0, cfg)
        np.testing.assert_array_equal(a.rewards, b.rewards)
        assert a.moves == b.moves
        c = build_pool(PARAMS, MAZES[0], 0, 1, cfg)  # different eval seed
        assert a.moves != c.moves

    def test_evaluate_rows(self):
        cfg = EvalConfig(mode="vpo", m=3, k_list=(1, 3), k_max=3, seeds=2)
        rows, pools = evaluate(PARAMS, MAZES, cfg)
        assert len(rows) == 4  # 2 seeds x 2 k values
        assert set(rows[0]) == set(EVAL_COLUMNS)
        assert sorted(pools) == [0, 1]
        for row in rows:
            assert row["n_mazes"] == len(MAZES)
            assert 0.0 <= row["pass"] <= 1.0

    def test_evaluate_threads_agree(self):
        cfg = EvalConfig(mode="vpo", m=3, k_list=(3,), k_max=6, seeds=1)
        rows1, _ = evaluate(PARAMS, MAZES, cfg, threads=1)
        rows4, _ = evaluate(PARAMS, MAZES, cfg, threads=4)
        assert rows1 == rows4

    def test_config_validation(self):
        with pytest.raises(EstimatorError):
            EvalConfig(mode="sarsa").validate()
        with pytest.raises(EstimatorError):
            EvalConfig(k_list=(50,), k_max=30).validate()


class TestSerialization:
    def test_csv_round_trip_text(self, tmp_path):
        cfg = EvalConfig(mode="vpo", m=3, k_list=(3,), k_max=3)
        rows, _ = evaluate(PARAMS, MAZES[:2], cfg)
        path = str(tmp_path / "eval.csv")
        write_eval_csv(path, rows)
        lines = open(path).read().splitlines()
        assert lines[0] == ",".join(EVAL_COLUMNS)
        assert len(lines) == 2

    def test_jsonl_round_trip(self, tmp_path):
        cfg = EvalConfig(mode="vpo", m=3, k_list=(3,), k_max=6)
        _, pools_by_seed = evaluate(PARAMS, MAZES[:3], cfg)
        pools = pools_by_seed[0]
        path = str(tmp_path / "cands.jsonl")
        write_candidates_jsonl(path, pools)
        back = pools_from_jsonl(path)
        assert len(back) == len(pools)
        for a, b in zip(pools, back):
            assert a.maze_id == b.maze_id
            np.testing.assert_allclose(a.rewards, b.rewards, atol=1e-15)
            np.testing.assert_allclose(a.scalars, b.scalars, atol=1e-15)
            np.testing.assert_array_equal(a.successes, b.successes)
            assert a.moves == b.moves
            assert a.chain_ids == b.chain_ids

    def test_jsonl_reports_bad_line(self, tmp_path):
        path = str(tmp_path / "bad.jsonl")
        with open(path, "w") as fh:
            fh.write('{"maze_id": 0, "chain_id": 0, "answer_idx": 0, '
                     '"moves": "", "reward": [1,0,0,1], "scalar": 0.5}\n')
            fh.write("not json\n")
        with pytest.raises(ValueError, match=r"bad\.jsonl:2:"):
            pools_from_jsonl(path)

    def test_jsonl_missing_field(self, tmp_path):
        path = str(tmp_path / "bad.jsonl")
        with open(path, "w") as fh:
            fh.write('{"maze_id": 0, "chain_id": 0, "moves": ""}\n')
        with pytest.raises(ValueError, match="answer_idx"):
            pools_from_jsonl(path)

    def test_rows_from_pools_manual(self):
        pool = MazePool(
            maze_id=0,
            rewards=np.array([[1.0, 0, 0, 1], [1, 1, 0, 1], [0, 0, 0, 0]]),
            scalars=np.array([0.5, 0.75, 0.0]),
            successes=np.array([True, True, False]),
            moves=["UP", "DOWN", ""],
            chain_ids=[0, 1, 2],
            answer_idx=[0, 0, 0],
        )
        rows = rows_from_pools([pool], "grpo", 0, (1, 3))
        byk = {r["k"]: r for r in rows}
        assert byk[1]["best_prefix"] == 0.5
        assert byk[3]["best_prefix"] == 0.75
        assert byk[3]["pass"] == 1.0
        assert byk[1]["pass"] == pytest.approx(2 / 3)
