"""Instance builders for experiments."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .core import CongestionGame, GameState, InvalidGameError, LatencyFunction, PreconditionError
from .paths import singleton_game


# -- threshold games -----------------------------------------------------------


@dataclass(frozen=True)
class ThresholdGameSpec:
    """Quadratic threshold game over ``n_base`` base players.

    ``a`` is a symmetric matrix of positive integer weights (diagonal
    ignored).  With ``tripled`` every base player becomes three copies and the
    private resource gains an offset of ``3/2 * sum_j a_ij``.
    """

    n_base: int
    a: tuple[tuple[int, ...], ...]
    tripled: bool = True

    def __post_init__(self):
        a = np.asarray(self.a)
        if self.n_base < 2:
            raise InvalidGameError("threshold games need at least two base players")
        if a.shape != (self.n_base, self.n_base):
            raise InvalidGameError("weight matrix must be n_base x n_base")
        off = ~np.eye(self.n_base, dtype=bool)
        if not np.array_equal(a, a.T):
            raise InvalidGameError("weight matrix must be symmetric")
        if np.any(a[off] <= 0):
            raise InvalidGameError("weights must be positive")
        object.__setattr__(self, "a", tuple(tuple(int(v) for v in row) for row in a))

    @property
    def copies(self) -> int:
        return 3 if self.tripled else 1

    @property
    def n(self) -> int:
        return self.copies * self.n_base

    @classmethod
    def random(cls, n_base: int, rng: np.random.Generator, high: int = 10, tripled: bool = True):
        a = rng.integers(1, high + 1, size=(n_base, n_base))
        a = np.triu(a, 1)
        return cls(n_base, tuple(map(tuple, a + a.T)), tripled)


def out_strategy(i: int) -> int:
    """Index of ``S_out`` of base player ``i``; ``S_in`` is the next index."""
    return 2 * i


def in_strategy(i: int) -> int:
    return 2 * i + 1


def build_threshold_game(spec: ThresholdGameSpec) -> CongestionGame:
    """Edges ``r_0..r_{n-1}`` (private) then ``r_ij`` for ``i < j``.

    Strategy ``2i`` is ``{r_i}``, strategy ``2i+1`` is ``{r_ij : j != i}``;
    each base player's copies form one player class.
    """
    nb = spec.n_base
    a = np.asarray(spec.a)
    pair_edge = {}
    edges = []
    for i in range(nb):
        total = float(a[i].sum() - a[i, i])
        offset = 1.5 * total if spec.tripled else 0.0
        edges.append(LatencyFunction.linear(total / 2, offset))
    for i, j in combinations(range(nb), 2):
        pair_edge[(i, j)] = pair_edge[(j, i)] = len(edges)
        edges.append(LatencyFunction.linear(float(a[i, j])))
    strategies = []
    for i in range(nb):
        strategies.append((i,))
        strategies.append(tuple(pair_edge[(i, j)] for j in range(nb) if j != i))
    groups = np.repeat(np.arange(nb), 2)
    sizes = [spec.copies] * nb
    return CongestionGame(edges, strategies, spec.n, "explicit", groups, sizes)


def threshold_initial_state(game: CongestionGame, spec: ThresholdGameSpec, s_init: Sequence[bool]) -> GameState:
    """Copy 1 on ``S_out``, copy 2 on ``S_in``, copy 3 on ``S_in`` iff ``s_init[i]``.

    For an untripled spec the single copy follows ``s_init``.
    """
    if len(s_init) != spec.n_base:
        raise InvalidGameError("one initial choice per base player required")
    x = np.zeros(2 * spec.n_base, dtype=np.int64)
    for i, inside in enumerate(s_init):
        x[in_strategy(i) if inside else out_strategy(i)] += 1
        if spec.tripled:
            x[out_strategy(i)] += 1
            x[in_strategy(i)] += 1
    return GameState(game, x)


def tripled_invariant_violations(state: GameState) -> list[int]:
    """Base players whose three copies all sit on ``S_out`` or all on ``S_in``."""
    x = state.x.reshape(-1, 2)
    return [int(i) for i in np.flatnonzero((x[:, 0] == 3) | (x[:, 1] == 3))]


# -- singleton instances -------------------------------------------------------


def build_overshoot_pair(c: float, d_exp: int, n: int, x2_init: int) -> tuple[CongestionGame, GameState]:
    """Link 1 has constant latency ``c``, link 2 has ``x**d_exp``; ``x2_init`` players on link 2."""
    b = c - float(x2_init) ** d_exp
    if b <= 0:
        raise PreconditionError(f"latency gap b = c - x2^d = {b} must be positive")
    if not 0 <= x2_init <= n:
        raise PreconditionError("x2_init must lie in 0..n")
    game = singleton_game([LatencyFunction.constant(c), LatencyFunction.monomial(1.0, d_exp)], n)
    return game, GameState(game, [n - x2_init, x2_init])


def build_sampling_lowerbound(m: int) -> tuple[CongestionGame, GameState]:
    """``m`` identical links ``l(x) = x``, ``n = 2m``, state ``(3, 1, 2, ..., 2)``."""
    if m < 3:
        raise PreconditionError("the instance needs m >= 3")
    game = singleton_game([LatencyFunction.linear(1.0)] * m, 2 * m)
    return game, GameState(game, [3, 1] + [2] * (m - 2))


def random_state(game: CongestionGame, rng: np.random.Generator) -> GameState:
    """Every player picks a strategy of its class uniformly at random."""
    x = np.zeros(game.num_strategies, dtype=np.int64)
    for g, size in enumerate(game.group_sizes):
        a, b = game.group_path_start[g], game.group_path_stop[g]
        x[a:b] = rng.multinomial(int(size), np.full(b - a, 1.0 / (b - a)))
    return GameState(game, x)


def random_singleton(
    m: int,
    n: int,
    coefficient_range: tuple[float, float] = (1.0, 2.0),
    degree: int = 1,
    seed: int = 0,
) -> tuple[CongestionGame, GameState]:
    """Polynomial links ``sum_{k=1..degree} a_k x^k`` with ``a_k ~ U(range)``.

    Constant terms are zero, so empty links have zero latency.
    """
    if m < 1 or n < 1:
        raise InvalidGameError("m and n must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = coefficient_range
    coeffs = rng.uniform(lo, hi, size=(m, degree))
    game = singleton_game([LatencyFunction.poly(0.0, *row) for row in coeffs], n)
    return game, random_state(game, rng)


def linear_singleton(slopes: Sequence[float], n: int) -> CongestionGame:
    return singleton_game([LatencyFunction.linear(float(a)) for a in slopes], n)


def scaled_singleton(polys: Sequence[Sequence[float]], n: int) -> CongestionGame:
    """Links ``l_e(x / n)`` for polynomials given by coefficient lists on ``[0, 1]``."""
    edges = [
        LatencyFunction.poly(*(a / float(n) ** k for k, a in enumerate(coeffs))) for coeffs in polys
    ]
    return singleton_game(edges, n)
