"""Social cost quantities of singleton games with linear latencies."""

from __future__ import annotations

import numpy as np

from ..core import CongestionGame, InvalidGameError, PreconditionError, as_state
from .equilibria import is_imitation_stable

BOUND_RTOL = 1e-12


def _require_singleton(game: CongestionGame):
    if game.kind != "singleton":
        raise InvalidGameError("social cost quantities need a singleton game")


def linear_slopes(game: CongestionGame) -> np.ndarray:
    """Slopes ``a_e`` of a singleton game whose latencies are ``a_e * x``."""
    _require_singleton(game)
    slopes = []
    for f in game.edges:
        vals = f.values
        if f.kind != "poly" or vals[0] != 0 or any(v != 0 for v in vals[2:]) or len(vals) < 2:
            raise InvalidGameError("latencies must be of the form a*x with a > 0")
        slopes.append(vals[1])
    return np.array(slopes)


def fractional_optimum(game: CongestionGame) -> tuple[np.ndarray, float, frozenset]:
    """Optimal fractional loads ``n / (A * a_e)``, ``A = sum 1/a_e`` and the useless edges."""
    a = linear_slopes(game)
    big_a = float(np.sum(1.0 / a))
    x_frac = game.n / (big_a * a)
    useless = frozenset(np.flatnonzero(x_frac < 1).tolist())
    return x_frac, big_a, useless


def social_cost(game: CongestionGame, x) -> float:
    """Average latency ``sum_e (x_e / n) * l_e(x_e)``."""
    _require_singleton(game)
    state = as_state(game, x)
    lat = game.lat_table[np.arange(game.num_edges), state.loads]
    return float(state.loads @ lat) / game.n


def stable_cost_bounds_check(game: CongestionGame, x) -> bool:
    """Whether ``n/A <= SC(x) <= 3 n/A`` for a stable, fully used state.

    Preconditions: no useless edge, every edge used, and no player can gain
    more than ``a_max`` by copying another.
    """
    _, big_a, useless = fractional_optimum(game)
    state = as_state(game, x)
    if useless:
        raise PreconditionError(f"useless resources present: {sorted(useless)}")
    if np.any(state.loads == 0):
        raise PreconditionError("every resource must be used")
    a_max = float(linear_slopes(game).max())
    if not is_imitation_stable(game, state, a_max):
        raise PreconditionError("state is not imitation-stable with nu = a_max")
    sc = social_cost(game, state)
    opt = game.n / big_a
    return opt * (1 - BOUND_RTOL) <= sc <= 3 * opt * (1 + BOUND_RTOL)
