"""Virtual potential gain, concurrency error terms and their decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CongestionGame, PreconditionError, Snapshot, as_state

DECOMPOSE_RTOL = 1e-9


class ConsistencyFault(AssertionError):
    """The potential bound failed beyond floating tolerance (implementation bug)."""


def _moves(mv) -> np.ndarray:
    return np.asarray(getattr(mv, "moves", mv), dtype=np.int64)


def _check(game, x, mv):
    state = as_state(game, x)
    moves = _moves(mv)
    if moves.shape != (game.num_strategies,) * 2:
        raise PreconditionError("migration vector does not match the strategy count")
    if np.any(moves < 0) or np.any(moves.sum(axis=1) > state.x):
        raise PreconditionError("infeasible migration vector")
    return state, moves


def virtual_gain(game: CongestionGame, x, mv) -> float:
    """Sum over pairs of ``dx_PQ * (l_Q(x + 1_Q - 1_P) - l_P(x))``."""
    state, moves = _check(game, x, mv)
    s = Snapshot.of(game, state)
    return float(np.sum(moves * (s.after - s.path_lat[:, None])))


def edge_error_terms(game: CongestionGame, x, mv) -> np.ndarray:
    """Per-edge error ``F_e``; every entry is non-negative."""
    state, moves = _check(game, x, mv)
    dx_e = game.edge_loads(moves.sum(axis=0) - moves.sum(axis=1))
    xe = state.loads
    idx = np.arange(game.num_edges)
    lat, cum = game.lat_table, game.cum_table
    new = xe + dx_e
    # dx > 0: sum_{u=x+1}^{x+dx} l(u) - dx * l(x+1)
    up = cum[idx, np.maximum(new, xe)] - cum[idx, xe] - np.maximum(dx_e, 0) * lat[idx, xe + 1]
    # dx < 0: |dx| * l(x) - sum_{u=x+dx+1}^{x} l(u)
    down = np.maximum(-dx_e, 0) * lat[idx, xe] - (cum[idx, xe] - cum[idx, np.minimum(new, xe)])
    return np.where(dx_e > 0, up, np.where(dx_e < 0, down, 0.0))


def error_terms(game: CongestionGame, x, mv) -> float:
    return float(edge_error_terms(game, x, mv).sum())


@dataclass(frozen=True)
class PotentialDecomposition:
    virtual_gain: float
    error_sum: float
    true_gain: float

    @property
    def slack(self) -> float:
        return self.virtual_gain + self.error_sum - self.true_gain


def decompose(game: CongestionGame, x, mv, rtol: float = DECOMPOSE_RTOL) -> PotentialDecomposition:
    """Virtual gain, error sum and the true potential change of ``mv``.

    Raises :class:`ConsistencyFault` if the true change exceeds the other two
    by more than ``rtol`` relative to the magnitudes involved.
    """
    state, moves = _check(game, x, mv)
    s = Snapshot.of(game, state)
    after = state.apply(moves)
    true_gain = float(
        game.cum_table[np.arange(game.num_edges), after.loads].sum() - s.potential()
    )
    result = PotentialDecomposition(
        virtual_gain(game, state, moves), error_terms(game, state, moves), true_gain
    )
    scale = max(1.0, abs(result.virtual_gain), abs(result.error_sum), abs(true_gain), s.potential())
    if result.slack < -rtol * scale:
        raise ConsistencyFault(f"potential bound violated: {result}")
    return result
