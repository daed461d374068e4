import math

import numpy as np
import pytest

from imitation_dynamics import GameState, ProtocolParams, Snapshot, compute_bounds
from imitation_dynamics.analysis import is_imitation_stable, is_nash
from imitation_dynamics.core import InvalidGameError, PreconditionError
from imitation_dynamics.dynamics import improving_imitations, replay_rounds, sequential_imitation_step
from imitation_dynamics.generators import (
    ThresholdGameSpec,
    build_overshoot_pair,
    build_sampling_lowerbound,
    build_threshold_game,
    in_strategy,
    out_strategy,
    random_singleton,
    random_state,
    scaled_singleton,
    threshold_initial_state,
    tripled_invariant_violations,
)


def pair_spec(tripled):
    return ThresholdGameSpec(2, ((0, 4), (4, 0)), tripled)


class TestThreshold:
    def test_plain(self):
        game = build_threshold_game(pair_spec(False))
        assert game.n == 2
        assert [f.values for f in game.edges] == [(0.0, 2.0), (0.0, 2.0), (0.0, 4.0)]
        assert game.strategies[out_strategy(0)] == (0,)
        assert game.strategies[in_strategy(0)] == (2,)

    def test_tripled(self):
        game = build_threshold_game(pair_spec(True))
        assert game.n == 6
        assert game.edges[0](1) == 8 and game.edges[0](2) == 10  # 2x + 6
        assert game.group_sizes.tolist() == [3, 3]

    def test_canonical_start(self):
        spec = ThresholdGameSpec.random(3, np.random.default_rng(0))
        game = build_threshold_game(spec)
        state = threshold_initial_state(game, spec, [True, False, True])
        # copy 1 out, copy 2 in, copy 3 as chosen
        assert state.x.tolist() == [1, 2, 2, 1, 1, 2]
        assert tripled_invariant_violations(state) == []

    def test_violation_detected(self):
        game = build_threshold_game(pair_spec(True))
        assert tripled_invariant_violations(GameState(game, [3, 0, 1, 2])) == [0]
        assert tripled_invariant_violations(GameState(game, [1, 2, 0, 3])) == [1]

    @pytest.mark.parametrize(
        "args",
        [(1, ((0,),)), (2, ((0, 1), (2, 0))), (2, ((0, 0), (0, 0))), (2, ((0, 1, 1), (1, 0, 1)))],
    )
    def test_spec_validation(self, args):
        with pytest.raises(InvalidGameError):
            ThresholdGameSpec(*args)

    def test_tiny_sequential_terminates(self):
        spec = pair_spec(True)
        game = build_threshold_game(spec)
        for s_init in ([False, False], [True, False], [True, True]):
            state = threshold_initial_state(game, spec, s_init)
            for step in range(1000):
                nxt = sequential_imitation_step(game, state, 0, step)
                if nxt == state:
                    break
                state = nxt
                assert tripled_invariant_violations(state) == []
            assert not improving_imitations(game, Snapshot.of(game, state)).any()


class TestOvershoot:
    def test_gap(self):
        game, state = build_overshoot_pair(100, 4, 50, 2)
        assert game.edges[0](7) - game.edges[1](2) == 84
        assert state.x.tolist() == [48, 2]

    def test_gap_must_be_positive(self):
        with pytest.raises(PreconditionError):
            build_overshoot_pair(100, 4, 10_000, 10)

    def test_linear_has_no_damping(self):
        game, _ = build_overshoot_pair(100, 1, 50, 2)
        assert compute_bounds(game).d == 1

    def test_not_stable_without_guard(self):
        game, state = build_overshoot_pair(100, 4, 50, 2)
        assert not is_imitation_stable(game, state, 0.0)
        # gain 100 - 3^4 = 19 is below the slope bound 4^4 - 3^4 = 175
        assert compute_bounds(game).nu == 175
        assert is_imitation_stable(game, state)


class TestSamplingInstance:
    def test_shape(self):
        game, state = build_sampling_lowerbound(3)
        assert game.n == 6 and state.x.tolist() == [3, 1, 2]

    @pytest.mark.parametrize("m", [3, 5, 8])
    def test_single_improving_move(self, m):
        game, state = build_sampling_lowerbound(m)
        better = improving_imitations(game, Snapshot.of(game, state))
        assert list(zip(*np.nonzero(better))) == [(0, 1)]
        assert is_nash(game, state.moved(0, 1))

    def test_too_small(self):
        with pytest.raises(PreconditionError):
            build_sampling_lowerbound(2)

    @pytest.mark.parametrize("m", [3, 10])
    def test_move_probability(self, m):
        game, state = build_sampling_lowerbound(m)
        p = ProtocolParams(lam=1.0, use_nu_threshold=False, seed=m)
        mu = (3 - 2) / 3
        exact = 1 - (1 - mu / (2 * m)) ** 3
        replays = 20_000
        hits = replay_rounds(game, state, p, replays)[:, 0, 1] > 0
        se = math.sqrt(exact * (1 - exact) / replays)
        assert abs(hits.mean() - exact) < 4 * se
        assert exact <= 3 * mu / (2 * m)


class TestRandom:
    def test_seeded(self):
        a, sa = random_singleton(5, 100, seed=3)
        b, sb = random_singleton(5, 100, seed=3)
        assert [f.values for f in a.edges] == [f.values for f in b.edges]
        assert np.array_equal(sa.x, sb.x)
        assert all(f.degree == 1 and f.values[0] == 0 for f in a.edges)

    def test_mean_load(self):
        loads = np.array([random_singleton(4, 400, seed=s)[1].x for s in range(300)])
        assert np.allclose(loads.mean(axis=0), 100, rtol=0.03)

    def test_random_state_respects_classes(self):
        spec = ThresholdGameSpec.random(5, np.random.default_rng(1))
        game = build_threshold_game(spec)
        for seed in range(20):
            x = random_state(game, np.random.default_rng(seed)).x
            assert np.add.reduceat(x, game.group_path_start).tolist() == [3] * 5

    def test_scaled(self):
        game = scaled_singleton([(0, 1), (0, 2)], 100)
        assert game.edges[1](50) == pytest.approx(1.0)
