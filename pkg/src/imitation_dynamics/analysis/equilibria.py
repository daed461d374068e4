"""Stability and equilibrium detectors over a single state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CongestionGame, Snapshot


@dataclass(frozen=True)
class EquilibriumParams:
    """``(delta, epsilon, nu)`` of an approximate equilibrium.

    ``nu=None`` means the game's slope bound.
    """

    delta: float
    epsilon: float
    nu: float | None = None

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.nu is not None and self.nu < 0:
            raise ValueError("nu must be non-negative")


def _snap(game, x) -> Snapshot:
    return x if isinstance(x, Snapshot) else Snapshot.of(game, x)


def is_imitation_stable(game: CongestionGame, x, nu: float | None = None) -> bool:
    """No used P, Q (same player class) with ``l_P(x) > l_Q(x + 1_Q - 1_P) + nu``."""
    s = _snap(game, x)
    nu = game.bounds().nu if nu is None else nu
    used = s.x > 0
    pair = used[:, None] & used[None, :] & game.same_group
    return not np.any(pair & (s.path_lat[:, None] > s.after + nu))


def is_nash(game: CongestionGame, x) -> bool:
    """No player on any used P can strictly lower its latency by switching."""
    s = _snap(game, x)
    pair = (s.x > 0)[:, None] & game.same_group
    return not np.any(pair & (s.after < s.path_lat[:, None]))


def classify_paths(game: CongestionGame, x, eq: EquilibriumParams) -> tuple[frozenset, frozenset]:
    """Expensive and cheap path sets.

    expensive: ``l_P > (1 + eps) * L_av_plus + nu``
    cheap:     ``l_P < (1 - eps) * L_av - nu``
    """
    s = _snap(game, x)
    nu = game.bounds().nu if eq.nu is None else eq.nu
    l_av, l_av_plus = s.averages()
    expensive = np.flatnonzero(s.path_lat > (1 + eq.epsilon) * l_av_plus + nu)
    cheap = np.flatnonzero(s.path_lat < (1 - eq.epsilon) * l_av - nu)
    return frozenset(expensive.tolist()), frozenset(cheap.tolist())


def unsatisfied_fraction(game: CongestionGame, x, eq: EquilibriumParams) -> float:
    """Fraction of players on expensive or cheap paths."""
    s = _snap(game, x)
    expensive, cheap = classify_paths(game, s, eq)
    bad = list(expensive | cheap)
    return float(s.x[bad].sum()) / game.n if bad else 0.0


def is_approx_equilibrium(game: CongestionGame, x, eq: EquilibriumParams) -> bool:
    s = _snap(game, x)
    expensive, cheap = classify_paths(game, s, eq)
    bad = list(expensive | cheap)
    return int(s.x[bad].sum()) <= eq.delta * game.n
