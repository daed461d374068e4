import math

import numpy as np
import pytest

import oracles
from imitation_dynamics import (
    CongestionGame,
    DomainError,
    GameState,
    InvalidGameError,
    LatencyFunction,
    PreconditionError,
    Snapshot,
    averages,
    compute_bounds,
    eval_latency,
    latency_after_move,
    path_latency,
    rosenthal_potential,
    singleton_game,
)

L = LatencyFunction


def two_edge_game(n=5):
    # strategies: {0,1}, {1,2}, {2,3}, {0,3}
    edges = [L.linear(1.0), L.linear(2.0, 1.0), L.poly(0, 1, 1), L.table([i * (i + 1) // 2 for i in range(30)])]
    return CongestionGame(edges, [(0, 1), (1, 2), (2, 3), (0, 3)], n)


class TestLatencyFunction:
    def test_square(self):
        assert eval_latency(L.poly(0, 0, 1), 3) == 9

    def test_constant(self):
        assert eval_latency(L.constant(7.5), 5) == 7.5

    def test_table_lookup(self):
        f = L.table([0, 2, 5])
        assert eval_latency(f, 2) == 5

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            eval_latency(L.linear(1), -1)
        with pytest.raises(DomainError):
            eval_latency(L.linear(1), 4, n=3)
        with pytest.raises(DomainError):
            eval_latency(L.table([0, 1, 2]), 3)
        with pytest.raises(DomainError):
            eval_latency(L.linear(1), 1.5)

    @pytest.mark.parametrize(
        "make",
        [
            lambda: L.poly(-1, 1),
            lambda: L.poly(0, 0),
            lambda: L.table([0, 2, 1]),
            lambda: L.table([0, 0, 1]),
            lambda: L.table([1]),
        ],
    )
    def test_invalid(self, make):
        with pytest.raises(InvalidGameError):
            make()

    def test_grid_extrapolates_tables(self):
        f = L.table([0, 1, 3])
        assert f.grid(4).tolist() == [0, 1, 3, 5, 7]

    def test_degree(self):
        assert L.monomial(3, 4).degree == 4
        assert L.constant(2).degree == 0


class TestGame:
    def test_singleton_rules(self):
        with pytest.raises(InvalidGameError):
            CongestionGame([L.linear(1)], [(0,), (0,)], 2, kind="singleton")
        with pytest.raises(InvalidGameError):
            CongestionGame([L.linear(1), L.linear(1)], [(0, 1)], 2, kind="singleton")

    def test_unknown_edge(self):
        with pytest.raises(InvalidGameError):
            CongestionGame([L.linear(1)], [(1,)], 2)

    def test_table_too_short(self):
        with pytest.raises(InvalidGameError):
            CongestionGame([L.table([0, 1, 2])], [(0,)], 5)

    def test_state_validation(self):
        g = singleton_game([L.linear(1)] * 2, 4)
        with pytest.raises(InvalidGameError):
            GameState(g, [1, 1])
        with pytest.raises(InvalidGameError):
            GameState(g, [5, -1])
        with pytest.raises(InvalidGameError):
            GameState(g, [4])

    def test_state_is_read_only(self):
        g = singleton_game([L.linear(1)] * 2, 4)
        s = GameState(g, [2, 2])
        with pytest.raises(ValueError):
            s.x[0] = 3

    def test_apply_rejects_overdraw(self):
        g = singleton_game([L.linear(1)] * 2, 4)
        with pytest.raises(PreconditionError):
            GameState(g, [1, 3]).apply(np.array([[0, 2], [0, 0]]))


class TestPathLatency:
    def test_singleton(self):
        g = singleton_game([L.linear(1)], 4)
        assert path_latency(g, [4], 0) == 4

    def test_additive(self):
        g = CongestionGame([L.linear(1), L.linear(1)], [(0,), (0, 1), (1,)], 3)
        # x_e = (2, 3)
        assert path_latency(g, [0, 2, 1], 1) == 5

    def test_unused_path_sees_shared_congestion(self):
        g = two_edge_game()
        x = [2, 0, 3, 0]
        for p in range(4):
            assert path_latency(g, x, p) == pytest.approx(oracles.path_latency(g, x, p), rel=1e-12)


class TestLatencyAfterMove:
    def test_disjoint(self):
        g = two_edge_game()
        x = [2, 1, 1, 1]
        ld = oracles.loads(g, x)
        expect = g.edges[2](ld[2] + 1) + g.edges[3](ld[3] + 1)
        assert latency_after_move(g, x, 0, 2) == pytest.approx(expect)

    def test_identity(self):
        g = two_edge_game()
        x = [2, 1, 1, 1]
        assert latency_after_move(g, x, 1, 1) == path_latency(g, x, 1)

    def test_overlap_matches_recompute(self):
        g = two_edge_game()
        x = [2, 1, 1, 1]
        for p in range(4):
            for q in range(4):
                assert latency_after_move(g, x, p, q) == pytest.approx(oracles.after_move(g, x, p, q))

    def test_empty_origin(self):
        g = two_edge_game()
        with pytest.raises(PreconditionError):
            latency_after_move(g, [3, 0, 1, 1], 1, 0)


class TestAverages:
    def test_one_path(self):
        g = singleton_game([L.linear(1), L.linear(2)], 3)
        assert averages(g, [3, 0])[0] == 3

    def test_hand_values(self):
        g = singleton_game([L.linear(1)] * 2, 4)
        assert averages(g, [2, 2]) == (2.0, 3.0)

    def test_uniform_split(self):
        g = singleton_game([L.poly(1, 2)] * 5, 10)
        assert averages(g, [2] * 5)[0] == pytest.approx(5.0)


class TestPotential:
    def test_direct_sum(self):
        g = singleton_game([L.linear(1)] * 2, 3)
        assert rosenthal_potential(g, [2, 1]) == 4

    def test_empty_edge(self):
        g = singleton_game([L.linear(1), L.constant(5)], 3)
        assert rosenthal_potential(g, [3, 0]) == 6

    def test_recompute_after_moves(self):
        rs = np.random.default_rng(4)
        g = two_edge_game(12)
        x = np.array([3, 3, 3, 3])
        for _ in range(100):
            p = rs.choice(np.flatnonzero(x))
            q = rs.integers(4)
            x[p] -= 1
            x[q] += 1
            assert rosenthal_potential(g, x) == pytest.approx(oracles.potential(g, x), rel=1e-12)

    def test_snapshot_matches(self):
        g = two_edge_game()
        s = Snapshot.of(g, [1, 2, 1, 1])
        assert s.potential() == pytest.approx(oracles.potential(g, [1, 2, 1, 1]))


class TestBounds:
    def test_monomial_elasticity(self):
        g = singleton_game([L.monomial(3, 2)], 10)
        assert compute_bounds(g).d == 2

    def test_constant_clamps(self):
        g = singleton_game([L.constant(4)], 10)
        assert compute_bounds(g).d == 1

    def test_cubic_slope(self):
        g = singleton_game([L.monomial(1, 3)], 10)
        assert compute_bounds(g).nu_e == 19

    def test_fields(self):
        g = singleton_game([L.linear(2), L.poly(1, 0, 1)], 4)
        b = compute_bounds(g)
        assert b.ell_min == 2
        assert b.ell_max == 17
        assert b.beta == 7
        assert b.nu_e.tolist() == [2, 3]
        assert b.nu_P.tolist() == [2, 3]
        assert b.nu == 3

    def test_table_elasticity_discrete(self):
        f = L.table([0, 1, 4, 9, 16])
        g = singleton_game([f], 4)
        expect = max((f(x) - f(x - 1)) * x / f(x) for x in range(1, 5))
        assert compute_bounds(g).d == pytest.approx(max(1.0, expect))

    def test_zero_latency_at_one_rejected(self):
        with pytest.raises(InvalidGameError):
            singleton_game([L.table([0, 0, 1]), L.linear(1)], 2)

    def test_elasticity_inequality_on_grid(self):
        # l(a x) <= a^d l(x) on integer points
        f = L.poly(1, 2, 0, 3)
        g = singleton_game([f], 30)
        d = compute_bounds(g).d
        for x in range(1, 11):
            for a in (1, 2, 3):
                assert f(a * x) <= a**d * f(x) * (1 + 1e-12)
