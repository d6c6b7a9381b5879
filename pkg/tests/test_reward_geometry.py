"""Scalarization, Dirichlet sampling, and the exact set-reward engine."""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from vpomaze.reward_geometry import (
    PRESETS,
    WeightVector,
    gold_scalar,
    sample_dirichlet,
    sample_weight_matrix,
    scalarize,
    set_reward_exact,
    set_reward_mc,
    uniform_mean,
)
from vpomaze.streams import generator


def quad_oracle_d2(rewards):
    """E_t max_i (t*r_i0 + (1-t)*r_i1) by adaptive quadrature (d=2 only)."""

    def envelope(t):
        return max(t * r0 + (1.0 - t) * r1 for r0, r1 in rewards)

    val, err = scipy.integrate.quad(envelope, 0.0, 1.0, limit=200)
    assert err < 1e-7
    return val


finite_reward = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestExact:
    def test_two_unit_axes(self):
        got = set_reward_exact(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert got.value == 0.75
        assert got.error_bound == 0.0

    def test_d2_matches_quadrature(self):
        rng = generator(7, "test-d2")
        for _ in range(25):
            n = int(rng.integers(1, 6))
            rewards = rng.random((n, 2))
            got = set_reward_exact(rewards)
            want = quad_oracle_d2(rewards.tolist())
            assert got.value == pytest.approx(want, abs=1e-7)

    def test_singleton_is_mean(self):
        rng = generator(8, "test-singleton")
        for d in (2, 3, 4):
            r = rng.random((1, d))
            got = set_reward_exact(r)
            assert got.value == pytest.approx(float(r.mean()), abs=1e-12)

    @pytest.mark.parametrize("d", [3, 4])
    def test_high_d_matches_mc(self, d):
        rng = generator(9, "test-mc", d)
        draws = 200_000
        for _ in range(6):
            n = int(rng.integers(1, 6))
            rewards = rng.random((n, d))
            got = set_reward_exact(rewards)
            w = sample_weight_matrix(rng, draws, 1.0, d)
            per_draw = np.max(w @ rewards.T, axis=1)
            mc = float(per_draw.mean())
            se = float(per_draw.std(ddof=1)) / math.sqrt(draws)
            assert abs(got.value - mc) <= 4.0 * se + got.error_bound

    def test_error_bound_scales_with_resolution(self):
        rewards = generator(10, "test-res").random((4, 3))
        coarse = set_reward_exact(rewards, resolution=100)
        fine = set_reward_exact(rewards, resolution=1000)
        assert fine.error_bound < coarse.error_bound
        assert abs(fine.value - coarse.value) <= coarse.error_bound + fine.error_bound

    def test_monotone_in_set_growth(self):
        rng = generator(11, "test-mono")
        for d in (2, 3, 4):
            rewards = rng.random((4, d))
            small = set_reward_exact(rewards[:2])
            grown = set_reward_exact(rewards)
            assert grown.value >= small.value - (small.error_bound + grown.error_bound)

    def test_shift_by_common_vector(self):
        # adding c to every candidate adds E[w . c] = mean(c) at alpha=1
        rng = generator(12, "test-shift")
        rewards = rng.random((3, 4))
        c = rng.random(4)
        base = set_reward_exact(rewards)
        moved = set_reward_exact(rewards + c)
        assert moved.value - base.value == pytest.approx(
            float(c.mean()), abs=base.error_bound + moved.error_bound + 1e-12)

    def test_alpha_not_one_unsupported(self):
        with pytest.raises(NotImplementedError):
            set_reward_exact(np.ones((2, 3)), alpha=2.0)

    def test_mc_agrees_with_shared_weights(self):
        rng = generator(13, "test-shared")
        rewards = rng.random((3, 4))
        w = sample_weight_matrix(rng, 500, 1.0, 4)
        a = set_reward_mc(rewards, w)
        b = set_reward_mc(rewards, w)
        assert a == b  # same weight draws, same value


class TestWeights:
    def test_simplex_samples(self):
        rng = generator(14, "test-simplex")
        w = sample_weight_matrix(rng, 2000, 1.0, 4)
        assert w.shape == (2000, 4)
        assert (w >= 0).all()
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)

    def test_uniform_alpha_marginal(self):
        # each coordinate of Dir(1,...,1) in d=4 is Beta(1, 3)
        rng = generator(15, "test-ks")
        w = sample_weight_matrix(rng, 4000, 1.0, 4)
        stat = scipy.stats.kstest(w[:, 0], scipy.stats.beta(1, 3).cdf)
        assert stat.pvalue > 1e-3

    def test_weight_vector_validation(self):
        ones = np.ones(4)
        WeightVector(np.full(4, 0.25), alpha=ones)
        with pytest.raises(ValueError):
            WeightVector(np.array([0.5, 0.6]), alpha=np.ones(2))
        with pytest.raises(ValueError):
            WeightVector(np.array([1.5, -0.5]), alpha=np.ones(2))
        with pytest.raises(ValueError):
            WeightVector(np.full(4, 0.25), alpha=np.zeros(4))

    def test_sample_dirichlet_valid(self):
        w = sample_dirichlet(generator(16, "test-one"), 1.0, 4)
        assert isinstance(w, WeightVector)
        assert w.w.sum() == pytest.approx(1.0)
        assert w.alpha.shape == (4,)

    @given(st.lists(finite_reward, min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_scalarize_uniform(self, vals):
        r = np.array(vals)
        w = np.full(4, 0.25)
        assert scalarize(w, r) == pytest.approx(float(r.mean()), abs=1e-12)
        assert uniform_mean(r) == pytest.approx(float(r.mean()), abs=1e-12)


class TestPresets:
    def test_maze_uniform(self):
        w = PRESETS["maze_uniform"].weights
        np.testing.assert_allclose(w, np.full(4, 0.25))

    def test_presets_normalized(self):
        for preset in PRESETS.values():
            assert preset.weights.sum() == pytest.approx(1.0, abs=1e-12)
            assert (preset.weights > 0).all()

    def test_oversized_last_weight(self):
        w = PRESETS["musique_3x"].weights
        assert w[-1] == pytest.approx(3.0 * w[0])

    def test_gold_scalar(self):
        r = np.array([1.0, 0.5, 0.0, 1.0])
        assert gold_scalar(r) == pytest.approx(0.625)
        with pytest.raises(ValueError):
            gold_scalar(np.ones(3), "maze_uniform")
        with pytest.raises(ValueError, match="preset"):
            gold_scalar(np.ones(4), "no_such_preset")
