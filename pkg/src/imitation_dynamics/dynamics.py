"""Concurrent imitation / exploration rounds, sequential imitation and runs.

A round reads one immutable :class:`~imitation_dynamics.core.Snapshot`,
lets every player decide independently and applies the resulting
:class:`MigrationVector` once.  Player ``i``'s random numbers come from the
counter stream keyed by ``(seed, round, i)`` (see :mod:`.rng`), so a round is
reproducible and independent of how the player range is split over threads.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from . import rng
from ._kernels import MODE_COMBINED, MODE_EXPLORATION, MODE_IMITATION, round_moves
from .analysis.equilibria import (
    EquilibriumParams,
    is_approx_equilibrium,
    is_imitation_stable,
    is_nash,
    unsatisfied_fraction,
)
from .core import CongestionGame, ElasticityBounds, GameState, Snapshot, as_state

log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1 / 512
STRICT_LAMBDA = 1.6e-4

PROTOCOLS = ("imitation", "exploration", "combined", "sequential")
_MODES = {
    "imitation": MODE_IMITATION,
    "exploration": MODE_EXPLORATION,
    "combined": MODE_COMBINED,
}


@dataclass(frozen=True)
class ProtocolParams:
    """Knobs of a dynamics run.

    ``elasticity_damping=False`` drops the ``1/d`` factor from the imitation
    probability; it exists only to demonstrate overshooting.  ``nu`` and ``d``
    override the values derived from the game when given.
    """

    lam: float = DEFAULT_LAMBDA
    use_nu_threshold: bool = True
    protocol: str = "imitation"
    seed: int = 0
    round_limit: int = 10_000
    elasticity_damping: bool = True
    threads: int = 1
    nu: float | None = None
    d: float | None = None

    def __post_init__(self):
        if not 0 < self.lam <= 1:
            raise ValueError(f"lambda must lie in (0, 1], got {self.lam}")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.round_limit < 0:
            raise ValueError("round_limit must be non-negative")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def nu_for(self, bounds: ElasticityBounds) -> float:
        return bounds.nu if self.nu is None else float(self.nu)

    def d_for(self, bounds: ElasticityBounds) -> float:
        return bounds.d if self.d is None else float(self.d)

    def stability_threshold(self, bounds: ElasticityBounds) -> float:
        """Gain a move must exceed before imitation may pick it."""
        if self.protocol == "sequential" or not self.use_nu_threshold:
            return 0.0
        return self.nu_for(bounds)


@dataclass(frozen=True)
class MigrationVector:
    """Per ordered pair move counts ``moves[P, Q]`` of one round."""

    moves: np.ndarray

    def __post_init__(self):
        mv = np.asarray(self.moves, dtype=np.int64)
        if mv.ndim != 2 or mv.shape[0] != mv.shape[1]:
            raise ValueError("moves must be a square matrix")
        if np.any(mv < 0) or np.any(np.diag(mv) != 0):
            raise ValueError("moves must be non-negative with an empty diagonal")
        mv.setflags(write=False)
        object.__setattr__(self, "moves", mv)

    @classmethod
    def empty(cls, k: int) -> "MigrationVector":
        return cls(np.zeros((k, k), dtype=np.int64))

    @classmethod
    def from_pairs(cls, k: int, pairs: dict[tuple[int, int], int]) -> "MigrationVector":
        mv = np.zeros((k, k), dtype=np.int64)
        for (p, q), c in pairs.items():
            if p != q:
                mv[p, q] += c
        return cls(mv)

    def pairs(self) -> dict[tuple[int, int], int]:
        return {(int(p), int(q)): int(self.moves[p, q]) for p, q in zip(*np.nonzero(self.moves))}

    @property
    def total(self) -> int:
        return int(self.moves.sum())

    def outflow(self) -> np.ndarray:
        return self.moves.sum(axis=1)

    def delta_paths(self) -> np.ndarray:
        """``dx_P = sum_Q (dx_QP - dx_PQ)``."""
        return self.moves.sum(axis=0) - self.moves.sum(axis=1)

    def delta_edges(self, game: CongestionGame) -> np.ndarray:
        return game.edge_loads(self.delta_paths())

    def is_feasible(self, x) -> bool:
        return bool(np.all(self.outflow() <= np.asarray(getattr(x, "x", x))))


# -- migration probabilities ---------------------------------------------------


def imitation_migration_prob(
    l_p: float,
    l_q_after: float,
    bounds: ElasticityBounds,
    lam: float,
    use_nu_threshold: bool = True,
    damping: bool = True,
) -> float:
    if l_p <= 0:
        return 0.0
    threshold = bounds.nu if use_nu_threshold else 0.0
    if not l_p > l_q_after + threshold:
        return 0.0
    scale = lam / bounds.d if damping else lam
    return min(1.0, scale * (l_p - l_q_after) / l_p)


def exploration_migration_prob(
    l_p: float,
    l_q_after: float,
    bounds: ElasticityBounds,
    lam: float,
    num_paths: int,
    n: int,
) -> float:
    if l_p <= 0 or not l_p > l_q_after:
        return 0.0
    factor = lam * num_paths * bounds.ell_min / (bounds.beta * n)
    return min(1.0, factor * (l_p - l_q_after) / l_p)


def _gain_matrix(snap: Snapshot) -> tuple[np.ndarray, np.ndarray]:
    lp = snap.path_lat[:, None]
    gain = lp - snap.after
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(lp > 0, gain / np.where(lp > 0, lp, 1.0), 0.0)
    return gain, rel


def migration_matrices(
    game: CongestionGame, snap: Snapshot, params: ProtocolParams
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair migration probabilities ``(imitation, exploration)``.

    Rows of unused paths are zero; pairs across player classes are zero.
    """
    bounds = game.bounds()
    gain, rel = _gain_matrix(snap)
    used = (snap.x > 0)[:, None] & game.same_group
    k = game.num_strategies

    m_imit = np.zeros((k, k))
    if params.protocol in ("imitation", "combined"):
        thr = params.stability_threshold(bounds)
        scale = params.lam / params.d_for(bounds) if params.elasticity_damping else params.lam
        ok = used & (gain > thr)
        m_imit = np.where(ok, np.minimum(1.0, scale * rel), 0.0)

    m_expl = np.zeros((k, k))
    if params.protocol in ("exploration", "combined"):
        paths_in_group = (game.group_path_stop - game.group_path_start)[game.groups]
        factor = params.lam * paths_in_group * bounds.ell_min / (bounds.beta * game.n)
        ok = used & (gain > 0)
        m_expl = np.where(ok, np.minimum(1.0, factor[:, None] * rel), 0.0)
    return m_imit, m_expl


def can_move(snap: Snapshot, m_imit: np.ndarray, m_expl: np.ndarray) -> bool:
    """Whether any player has a positive chance to migrate."""
    used = snap.x > 0
    if np.any(m_imit[np.ix_(used, used)] > 0):
        return True
    return bool(np.any(m_expl[used] > 0))


# -- concurrent rounds ---------------------------------------------------------


def _chunks(n: int, threads: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, n, min(threads, n) + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _moves(game, snap, m_imit, m_expl, mode, key, threads):
    x = snap.x
    cum = np.concatenate([[0], np.cumsum(x)]).astype(np.int64)
    args = (x, cum, game.groups, game.group_path_start, game.group_path_stop, m_imit, m_expl, mode)
    key = np.uint64(key)
    if threads == 1:
        return round_moves(*args, key, 0, game.n)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda ab: round_moves(*args, key, ab[0], ab[1]), _chunks(game.n, threads))
        return sum(parts)


def concurrent_round(
    game: CongestionGame,
    x,
    params: ProtocolParams,
    round_index: int = 0,
    snap: Snapshot | None = None,
) -> tuple[GameState, MigrationVector]:
    """One round of the protocol named by ``params.protocol``."""
    if params.protocol == "sequential":
        raise ValueError("sequential imitation is not a concurrent round")
    if snap is None:
        snap = Snapshot.of(game, x)
    m_imit, m_expl = migration_matrices(game, snap, params)
    key = rng.stream_key(params.seed, round_index)
    moves = _moves(game, snap, m_imit, m_expl, _MODES[params.protocol], key, params.threads)
    mv = MigrationVector(moves)
    return snap.state.apply(mv), mv


def imitation_round(game, x, params: ProtocolParams, round_index: int = 0):
    return concurrent_round(game, x, _with_protocol(params, "imitation"), round_index)


def exploration_round(game, x, params: ProtocolParams, round_index: int = 0):
    return concurrent_round(game, x, _with_protocol(params, "exploration"), round_index)


def combined_round(game, x, params: ProtocolParams, round_index: int = 0):
    return concurrent_round(game, x, _with_protocol(params, "combined"), round_index)


def _with_protocol(params: ProtocolParams, protocol: str) -> ProtocolParams:
    if params.protocol == protocol:
        return params
    return replace(params, protocol=protocol)


def replay_rounds(
    game: CongestionGame, x, params: ProtocolParams, replays: int, first_round: int = 0
) -> np.ndarray:
    """Move matrices of ``replays`` independent rounds from the same state.

    Replay ``r`` uses the stream of round ``first_round + r``.  Returns an
    array of shape ``(replays, k, k)``.
    """
    snap = Snapshot.of(game, x)
    m_imit, m_expl = migration_matrices(game, snap, params)
    mode = _MODES[params.protocol]
    k = game.num_strategies
    out = np.zeros((replays, k, k), dtype=np.int64)
    if not can_move(snap, m_imit, m_expl):
        return out
    for r in range(replays):
        key = rng.stream_key(params.seed, first_round + r)
        out[r] = _moves(game, snap, m_imit, m_expl, mode, key, params.threads)
    return out


# -- sequential imitation ------------------------------------------------------


def improving_imitations(game: CongestionGame, snap: Snapshot) -> np.ndarray:
    """Boolean matrix of pairs (P, Q), both used, where P's players gain by copying Q."""
    used = snap.x > 0
    return used[:, None] & used[None, :] & game.same_group & (snap.after < snap.path_lat[:, None])


def sequential_imitation_step(
    game: CongestionGame, x, seed: int = 0, step: int = 0, snap: Snapshot | None = None
) -> GameState:
    """Move one player by imitation, chosen uniformly among improving player pairs.

    A pair (i on P, j on Q) is weighted ``x_P * x_Q``; the state is returned
    unchanged when no improving imitation exists.
    """
    if snap is None:
        snap = Snapshot.of(game, x)
    better = improving_imitations(game, snap)
    weights = np.where(better, np.outer(snap.x, snap.x), 0).ravel().astype(np.float64)
    total = weights.sum()
    if total == 0:
        return snap.state
    u = rng.uniform(rng.stream_key(seed, step), 0, rng.LANE_SAMPLE)
    idx = int(np.searchsorted(np.cumsum(weights), u * total, side="right"))
    idx = min(idx, weights.size - 1)
    while weights[idx] == 0:  # guards float edge cases at bucket borders
        idx -= 1
    p, q = divmod(idx, game.num_strategies)
    return snap.state.moved(p, q)


# -- runs ----------------------------------------------------------------------

StopCondition = Union[str, EquilibriumParams]
STOP_KINDS = ("imitation_stable", "nash", "round_limit")

TRACE_COLUMNS = (
    "round",
    "potential",
    "l_av",
    "l_av_plus",
    "max_used_latency",
    "migrations",
    "unsat_fraction",
)


@dataclass
class Trace:
    """Per-round record of a run; row 0 describes the initial state."""

    rows: list[tuple] = field(default_factory=list)
    converged: bool = False
    final_state: GameState | None = None
    min_edge_load: np.ndarray | None = None
    migration_vectors: list[MigrationVector] | None = None
    stop: str = ""

    @property
    def rounds(self) -> int:
        return self.rows[-1][0] if self.rows else 0

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self, path) -> None:
        """Write the rows to a path or an open text stream."""
        if hasattr(path, "write"):
            self._write(path)
            return
        with open(path, "w", newline="") as fh:
            self._write(fh)

    def _write(self, fh) -> None:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for r in self.rows:
            fh.write(f"{r[0]},{r[1]:.17g},{r[2]:.17g},{r[3]:.17g},{r[4]:.17g},{r[5]},{r[6]:.17g}\n")

    @staticmethod
    def read_csv(path) -> list[tuple]:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header {header}")
            return [
                (int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), int(r[5]), float(r[6]))
                for r in reader
            ]


def _stop_label(stop: StopCondition) -> str:
    if isinstance(stop, EquilibriumParams):
        return f"approx({stop.delta},{stop.epsilon},{stop.nu})"
    return stop


def _stop_met(game, snap, stop, threshold) -> bool:
    if isinstance(stop, EquilibriumParams):
        return is_approx_equilibrium(game, snap, stop)
    if stop == "imitation_stable":
        return is_imitation_stable(game, snap, threshold)
    if stop == "nash":
        return is_nash(game, snap)
    return False


def run(
    game: CongestionGame,
    x0,
    params: ProtocolParams,
    stop: StopCondition = "imitation_stable",
    eq: EquilibriumParams | None = None,
    record_migrations: bool = False,
) -> Trace:
    """Iterate rounds from ``x0`` until ``stop`` holds or ``params.round_limit``.

    ``eq`` only controls the ``unsat_fraction`` column (defaults to the stop
    condition when that is an approximate equilibrium, else
    ``(0.1, 0.1, nu)``).  States from which no player can ever move are
    absorbing; the remaining rounds are then filled without simulation since
    they cannot change anything.
    """
    if not isinstance(stop, EquilibriumParams) and stop not in STOP_KINDS:
        raise ValueError(f"unknown stop condition {stop!r}")
    bounds = game.bounds()
    threshold = params.stability_threshold(bounds)
    if eq is None:
        eq = stop if isinstance(stop, EquilibriumParams) else EquilibriumParams(0.1, 0.1)
    state = as_state(game, x0)
    snap = Snapshot.of(game, state)
    trace = Trace(stop=_stop_label(stop))
    trace.min_edge_load = state.loads.copy()
    if record_migrations:
        trace.migration_vectors = []
    sequential = params.protocol == "sequential"
    mode = None if sequential else _MODES[params.protocol]

    def row(t, s, migrations):
        l_av, l_av_plus = s.averages()
        return (
            t,
            s.potential(),
            l_av,
            l_av_plus,
            s.max_used_latency(),
            migrations,
            unsatisfied_fraction(game, s, eq),
        )

    current = row(0, snap, 0)
    trace.rows.append(current)
    met = _stop_met(game, snap, stop, threshold)
    matrices = None
    t = 0
    while not met and t < params.round_limit:
        if sequential:
            if not improving_imitations(game, snap).any():
                break
            new_state = sequential_imitation_step(game, snap.state, params.seed, t, snap)
            moved = 1
            mv = MigrationVector(_single_move(snap.state, new_state)) if record_migrations else None
        else:
            if matrices is None:
                matrices = migration_matrices(game, snap, params)
                if not can_move(snap, *matrices):
                    break
            key = rng.stream_key(params.seed, t)
            moves = _moves(game, snap, *matrices, mode, key, params.threads)
            moved = int(moves.sum())
            mv = MigrationVector(moves) if (moved or record_migrations) else None
            new_state = snap.state.apply(mv) if moved else snap.state
        t += 1
        if record_migrations:
            trace.migration_vectors.append(mv)
        if moved:
            snap = Snapshot.of(game, new_state)
            matrices = None
            np.minimum(trace.min_edge_load, snap.state.loads, out=trace.min_edge_load)
            current = row(t, snap, moved)
            met = _stop_met(game, snap, stop, threshold)
        else:
            current = (t,) + current[1:5] + (0,) + current[6:]
        trace.rows.append(current)

    if not met and t < params.round_limit:
        # absorbing state that does not satisfy the stop condition
        log.debug("absorbing state at round %d; filling to %d", t, params.round_limit)
        idle = (0,) + current[1:5] + (0,) + current[6:]
        trace.rows.extend((r,) + idle[1:] for r in range(t + 1, params.round_limit + 1))
        if record_migrations:
            empty = MigrationVector.empty(game.num_strategies)
            trace.migration_vectors.extend([empty] * (params.round_limit - t))
    trace.converged = met or stop == "round_limit"
    trace.final_state = snap.state
    return trace


def _single_move(before: GameState, after: GameState) -> np.ndarray:
    d = after.x - before.x
    k = d.size
    mv = np.zeros((k, k), dtype=np.int64)
    mv[int(np.argmin(d)), int(np.argmax(d))] = 1
    return mv
