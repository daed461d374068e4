"""Latency functions, congestion games, states and the Rosenthal potential.

Everything here is a pure read over immutable snapshots.  Latencies are
tabulated once per game on the integer grid ``0..n+1`` so that per-round
work reduces to array gathers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """A latency function was evaluated outside its domain."""


class InvalidGameError(ValueError):
    """A game, latency function or state violates its invariants."""


class PreconditionError(ValueError):
    """An operation was called on a state that does not satisfy its precondition."""


GAME_KINDS = ("network", "singleton", "explicit")


@dataclass(frozen=True)
class LatencyFunction:
    """Non-decreasing latency of a single edge.

    ``kind == "poly"`` stores coefficients ``a_0..a_d`` (all >= 0);
    ``kind == "table"`` stores the explicit values ``l(0), ..., l(n)``.
    """

    kind: str
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.kind not in ("poly", "table"):
            raise InvalidGameError(f"unknown latency kind {self.kind!r}")
        if not vals:
            raise InvalidGameError("latency function needs at least one value")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise InvalidGameError("latency values must be finite and non-negative")
        if self.kind == "poly":
            if all(v == 0 for v in vals):
                raise InvalidGameError("zero polynomial violates l(x) > 0 for x > 0")
        else:
            if len(vals) < 2:
                raise InvalidGameError("table latency needs entries for 0..n with n >= 1")
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise InvalidGameError("table latency must be non-decreasing")
            if vals[1] <= 0:
                raise InvalidGameError("table latency violates l(x) > 0 for x > 0")

    # -- constructors -------------------------------------------------------
    @classmethod
    def poly(cls, *coefficients: float) -> "LatencyFunction":
        return cls("poly", tuple(coefficients))

    @classmethod
    def linear(cls, a: float, b: float = 0.0) -> "LatencyFunction":
        """``l(x) = a*x + b``."""
        return cls("poly", (b, a))

    @classmethod
    def constant(cls, c: float) -> "LatencyFunction":
        return cls("poly", (c,))

    @classmethod
    def monomial(cls, a: float, degree: int) -> "LatencyFunction":
        return cls("poly", (0.0,) * degree + (a,))

    @classmethod
    def table(cls, values: Iterable[float]) -> "LatencyFunction":
        return cls("table", tuple(values))

    # -- evaluation ---------------------------------------------------------
    @property
    def degree(self) -> int:
        """Largest power with a non-zero coefficient (poly kind only)."""
        if self.kind != "poly":
            raise InvalidGameError("degree is only defined for polynomial latencies")
        return max(i for i, a in enumerate(self.values) if a != 0)

    @property
    def max_argument(self) -> int | None:
        return len(self.values) - 1 if self.kind == "table" else None

    def grid(self, top: int) -> np.ndarray:
        """Values on ``0..top``.

        Table functions are extended past their last entry with their final
        increment, which keeps them non-decreasing; this is only used for the
        hypothetical ``n+1``-th player in ``l_P(x + 1_P)``.
        """
        k = np.arange(top + 1, dtype=np.float64)
        if self.kind == "poly":
            out = np.zeros(top + 1)
            for a in reversed(self.values):
                out = out * k + a
            return out
        vals = np.asarray(self.values)
        if top < len(vals):
            return vals[: top + 1].copy()
        slope = vals[-1] - vals[-2]
        extra = vals[-1] + slope * np.arange(1, top - len(vals) + 2)
        return np.concatenate([vals, extra])

    def __call__(self, k: int) -> float:
        return eval_latency(self, k)


def eval_latency(f: LatencyFunction, k: int, n: int | None = None) -> float:
    """Latency of an edge carrying ``k`` players."""
    if isinstance(k, (bool, np.bool_)) or int(k) != k:
        raise DomainError(f"congestion must be an integer, got {k!r}")
    k = int(k)
    top = f.max_argument if n is None else n
    if k < 0 or (top is not None and k > top):
        raise DomainError(f"congestion {k} outside 0..{top}")
    if f.kind == "table":
        return f.values[k]
    acc = 0.0
    for a in reversed(f.values):
        acc = acc * k + a
    return acc


class CongestionGame:
    """Congestion game with ``n`` players over ``edges`` and ``strategies``.

    ``groups`` (optional) assigns every strategy to a player class; players of
    a class may only use, and only sample, strategies of that class.
    Strategies of one class must be contiguous and ``group_sizes`` fixes how
    many players each class has.  Without groups the game is symmetric.
    """

    def __init__(
        self,
        edges: Sequence[LatencyFunction],
        strategies: Sequence[Iterable[int]],
        n: int,
        kind: str = "explicit",
        groups: Sequence[int] | None = None,
        group_sizes: Sequence[int] | None = None,
    ):
        self.edges = tuple(edges)
        self.strategies = tuple(tuple(sorted(set(int(e) for e in s))) for s in strategies)
        self.n = int(n)
        self.kind = kind
        m, k = len(self.edges), len(self.strategies)
        if kind not in GAME_KINDS:
            raise InvalidGameError(f"unknown game kind {kind!r}")
        if self.n < 1:
            raise InvalidGameError("a game needs at least one player")
        if m < 1 or k < 1:
            raise InvalidGameError("a game needs at least one edge and one strategy")
        for s in self.strategies:
            if not s:
                raise InvalidGameError("strategies must be non-empty")
            if s[0] < 0 or s[-1] >= m:
                raise InvalidGameError(f"strategy {s} references an unknown edge")
        if kind == "singleton":
            if any(len(s) != 1 for s in self.strategies):
                raise InvalidGameError("singleton strategies must contain exactly one edge")
            if len(set(self.strategies)) != k:
                raise InvalidGameError("singleton strategies must be pairwise distinct")
        for f in self.edges:
            if f.kind == "table" and f.max_argument < self.n:
                raise InvalidGameError(
                    f"table latency has {len(f.values)} entries, needs {self.n + 1}"
                )

        if groups is None:
            self.groups = np.zeros(k, dtype=np.int64)
            self.group_sizes = np.array([self.n], dtype=np.int64)
        else:
            self.groups = np.asarray(groups, dtype=np.int64)
            self.group_sizes = np.asarray(group_sizes, dtype=np.int64)
            if self.groups.shape != (k,):
                raise InvalidGameError("one group id per strategy required")
            if np.any(np.diff(self.groups) < 0) or self.groups[0] != 0:
                raise InvalidGameError("group ids must be contiguous and start at 0")
            if np.any(np.diff(np.unique(self.groups)) != 1):
                raise InvalidGameError("group ids must be consecutive")
            if len(self.group_sizes) != self.groups[-1] + 1:
                raise InvalidGameError("one size per group required")
            if self.group_sizes.sum() != self.n or np.any(self.group_sizes < 1):
                raise InvalidGameError("group sizes must be positive and sum to n")
        ng = len(self.group_sizes)
        self.group_path_start = np.searchsorted(self.groups, np.arange(ng), side="left")
        self.group_path_stop = np.searchsorted(self.groups, np.arange(ng), side="right")
        self.same_group = self.groups[:, None] == self.groups[None, :]

        self.incidence = np.zeros((k, m), dtype=np.float64)
        for p, s in enumerate(self.strategies):
            self.incidence[p, list(s)] = 1.0
        self._incidence_int = self.incidence.astype(np.int64)
        # l_e(0..n+1) and partial sums sum_{i<=j} l_e(i)
        self.lat_table = np.vstack([f.grid(self.n + 1) for f in self.edges])
        self.cum_table = np.concatenate(
            [np.zeros((m, 1)), np.cumsum(self.lat_table[:, 1:], axis=1)], axis=1
        )
        self._bounds = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_strategies(self) -> int:
        return len(self.strategies)

    @property
    def is_symmetric(self) -> bool:
        return len(self.group_sizes) == 1

    def edge_loads(self, x: np.ndarray) -> np.ndarray:
        return x @ self._incidence_int

    def bounds(self) -> "ElasticityBounds":
        if self._bounds is None:
            self._bounds = compute_bounds(self)
        return self._bounds

    def with_players(self, n: int) -> "CongestionGame":
        """Same edges and strategies with a different (symmetric) player count."""
        if not self.is_symmetric:
            raise InvalidGameError("only symmetric games can be re-sized")
        return CongestionGame(self.edges, self.strategies, n, self.kind)

    def __repr__(self):
        return (
            f"CongestionGame(kind={self.kind!r}, edges={self.num_edges}, "
            f"strategies={self.num_strategies}, n={self.n})"
        )


class GameState:
    """Players per strategy plus the induced edge congestion."""

    __slots__ = ("game", "x", "loads")

    def __init__(self, game: CongestionGame, x: Iterable[int]):
        arr = np.array(list(x) if not isinstance(x, np.ndarray) else x, dtype=np.int64)
        if arr.shape != (game.num_strategies,):
            raise InvalidGameError(
                f"state has {arr.size} entries, game has {game.num_strategies} strategies"
            )
        if np.any(arr < 0):
            raise InvalidGameError("player counts must be non-negative")
        per_group = np.add.reduceat(arr, game.group_path_start)
        if not np.array_equal(per_group, game.group_sizes):
            raise InvalidGameError(
                f"state puts {per_group.tolist()} players into groups of sizes "
                f"{game.group_sizes.tolist()}"
            )
        arr.setflags(write=False)
        loads = game.edge_loads(arr)
        loads.setflags(write=False)
        self.game = game
        self.x = arr
        self.loads = loads

    def apply(self, mv) -> "GameState":
        """Apply a migration vector (or a raw move-count matrix) atomically."""
        moves = np.asarray(getattr(mv, "moves", mv))
        out = moves.sum(axis=1)
        if np.any(out > self.x):
            raise PreconditionError("migration moves more players than a path holds")
        return GameState(self.game, self.x - out + moves.sum(axis=0))

    def moved(self, p: int, q: int) -> "GameState":
        """State after a single player switched from ``p`` to ``q``."""
        if self.x[p] < 1:
            raise PreconditionError(f"no player on path {p}")
        x = self.x.copy()
        x[p] -= 1
        x[q] += 1
        return GameState(self.game, x)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x)

    def __eq__(self, other):
        return (
            isinstance(other, GameState)
            and other.game is self.game
            and np.array_equal(other.x, self.x)
        )

    def __hash__(self):
        return hash(self.x.tobytes())

    def __repr__(self):
        return f"GameState({self.x.tolist()})"


def as_state(game: CongestionGame, x) -> GameState:
    return x if isinstance(x, GameState) else GameState(game, x)


@dataclass(frozen=True)
class Snapshot:
    """All latencies a round needs, evaluated once on a fixed state.

    ``after[p, q]`` is ``l_q(x + 1_q - 1_p)``: edges shared by ``p`` and ``q``
    keep their congestion, the others of ``q`` gain one player.
    """

    state: GameState
    edge_lat: np.ndarray
    edge_lat_plus: np.ndarray
    path_lat: np.ndarray
    path_lat_plus: np.ndarray
    after: np.ndarray

    @classmethod
    def of(cls, game: CongestionGame, x) -> "Snapshot":
        state = as_state(game, x)
        m = game.num_edges
        idx = np.arange(m)
        lat = game.lat_table[idx, state.loads]
        lat_plus = game.lat_table[idx, state.loads + 1]
        A = game.incidence
        path_lat = A @ lat
        path_lat_plus = A @ lat_plus
        after = path_lat_plus[None, :] + (A * (lat - lat_plus)) @ A.T
        return cls(state, lat, lat_plus, path_lat, path_lat_plus, after)

    @property
    def x(self) -> np.ndarray:
        return self.state.x

    def potential(self) -> float:
        g = self.state.game
        return float(g.cum_table[np.arange(g.num_edges), self.state.loads].sum())

    def averages(self) -> tuple[float, float]:
        n = self.state.game.n
        return float(self.x @ self.path_lat) / n, float(self.x @ self.path_lat_plus) / n

    def max_used_latency(self) -> float:
        return float(self.path_lat[self.x > 0].max())


def path_latency(game: CongestionGame, x, p: int) -> float:
    """``l_P(x)``: sum of the edge latencies of path ``p``."""
    _check_path(game, p)
    state = as_state(game, x)
    return float(sum(game.lat_table[e, state.loads[e]] for e in game.strategies[p]))


def latency_after_move(game: CongestionGame, x, p: int, q: int) -> float:
    """``l_Q(x + 1_Q - 1_P)`` for a single player moving from ``p`` to ``q``."""
    _check_path(game, p)
    _check_path(game, q)
    state = as_state(game, x)
    if state.x[p] < 1:
        raise PreconditionError(f"path {p} carries no player")
    shared = set(game.strategies[p])
    total = 0.0
    for e in game.strategies[q]:
        load = state.loads[e] if e in shared else state.loads[e] + 1
        total += game.lat_table[e, load]
    return float(total)


def averages(game: CongestionGame, x) -> tuple[float, float]:
    """Return ``(L_av, L_av_plus)``."""
    return Snapshot.of(game, x).averages()


def rosenthal_potential(game: CongestionGame, x) -> float:
    state = as_state(game, x)
    return float(game.cum_table[np.arange(game.num_edges), state.loads].sum())


def _check_path(game: CongestionGame, p: int):
    if not 0 <= int(p) < game.num_strategies:
        raise IndexError(f"path index {p} outside 0..{game.num_strategies - 1}")


@dataclass(frozen=True)
class ElasticityBounds:
    """Steepness parameters of a game's latency functions.

    d        elasticity bound (>= 1)
    nu_e     per-edge slope on almost empty edges
    nu_P     per-path slope
    nu       global slope bound, ``max nu_P``
    beta     largest single-step latency increase on any edge
    ell_min  ``min_e l_e(1)``
    ell_max  ``max_P l_P`` with all ``n`` players on ``P``
    """

    d: float
    nu_e: np.ndarray
    nu_P: np.ndarray
    nu: float
    beta: float
    ell_min: float
    ell_max: float


def _elasticity(f: LatencyFunction, n: int) -> float:
    if f.kind == "poly":
        return float(max(1, f.degree))
    vals = np.asarray(f.values[: n + 1])
    x = np.arange(1, n + 1)
    diff = vals[1:] - vals[:-1]
    return float(max(1.0, np.max(diff * x / vals[1:])))


def compute_bounds(game: CongestionGame) -> ElasticityBounds:
    lat = game.lat_table[:, : game.n + 1]
    ell_one = lat[:, 1]
    if np.any(ell_one <= 0):
        raise InvalidGameError("every edge needs l_e(1) > 0")
    d = max(_elasticity(f, game.n) for f in game.edges)
    steps = np.diff(lat, axis=1)
    top = min(math.ceil(d), game.n)
    nu_e = steps[:, :top].max(axis=1)
    nu_P = game.incidence @ nu_e
    ell_max = float((game.incidence @ lat[:, game.n]).max())
    return ElasticityBounds(
        d=d,
        nu_e=nu_e,
        nu_P=nu_P,
        nu=float(nu_P.max()),
        beta=float(steps.max()),
        ell_min=float(ell_one.min()),
        ell_max=ell_max,
    )
