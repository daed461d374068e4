"""Statistical checks of the expected potential drop of one round."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from ..core import CongestionGame, Snapshot, as_state
from ..dynamics import (
    ProtocolParams,
    exploration_migration_prob,
    imitation_migration_prob,
    replay_rounds,
)
from .equilibria import is_imitation_stable

SIGMAS = 3.0


def potential_changes(game: CongestionGame, x, moves: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """True and virtual potential change for a stack of move matrices ``(R, k, k)``."""
    s = Snapshot.of(game, x)
    dx_p = moves.sum(axis=1) - moves.sum(axis=2)
    loads = s.state.loads[None, :] + dx_p @ game.incidence.astype(np.int64)
    idx = np.arange(game.num_edges)
    phi_after = game.cum_table[idx[None, :], loads].sum(axis=1)
    dphi = phi_after - s.potential()
    virtual = np.einsum("rpq,pq->r", moves, s.after - s.path_lat[:, None])
    return dphi, virtual


@dataclass(frozen=True)
class MartingaleReport:
    replays: int
    mean_dphi: float
    stderr_dphi: float
    mean_virtual: float
    mean_gap: float
    stderr_gap: float
    stable: bool

    @property
    def decreasing(self) -> bool:
        """Mean potential change plus three standard errors is negative."""
        return self.mean_dphi + SIGMAS * self.stderr_dphi < 0

    @property
    def half_virtual_bound(self) -> bool:
        """``E[dPhi] <= E[V] / 2`` within three standard errors of the paired gap."""
        return self.mean_gap <= SIGMAS * self.stderr_gap

    @property
    def passed(self) -> bool:
        return self.decreasing and self.half_virtual_bound

    def as_dict(self) -> dict:
        return {
            "replays": self.replays,
            "mean_dphi": self.mean_dphi,
            "stderr_dphi": self.stderr_dphi,
            "mean_virtual": self.mean_virtual,
            "mean_gap": self.mean_gap,
            "stderr_gap": self.stderr_gap,
            "stable": self.stable,
            "decreasing": self.decreasing,
            "half_virtual_bound": self.half_virtual_bound,
            "passed": self.passed,
        }


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(math.fsum(v) / v.size), float(v.std(ddof=1) / math.sqrt(v.size))


def martingale_test(
    game: CongestionGame, x, params: ProtocolParams | None = None, replays: int = 10_000
) -> MartingaleReport:
    """Replay one round ``replays`` times from ``x`` and summarise the potential change."""
    params = params or ProtocolParams()
    state = as_state(game, x)
    moves = replay_rounds(game, state, params, replays)
    dphi, virtual = potential_changes(game, state, moves)
    mean, se = _mean_se(dphi)
    gap_mean, gap_se = _mean_se(dphi - 0.5 * virtual)
    stable = is_imitation_stable(game, state, params.stability_threshold(game.bounds()))
    return MartingaleReport(replays, mean, se, float(virtual.mean()), gap_mean, gap_se, stable)


def player_outcomes(game: CongestionGame, x, params: ProtocolParams) -> dict[int, list[tuple[int, float]]]:
    """Destination distribution ``[(Q, prob), ...]`` of a player on each used path."""
    s = Snapshot.of(game, x)
    bounds = game.bounds()
    thr_bounds = bounds
    if params.nu is not None or params.d is not None:
        thr_bounds = replace(bounds, nu=params.nu_for(bounds), d=params.d_for(bounds))
    out = {}
    for p in np.flatnonzero(s.x):
        g = game.groups[p]
        ps, pe = game.group_path_start[g], game.group_path_stop[g]
        size = game.group_sizes[g]
        dist = {}
        for q in range(ps, pe):
            if q == p:
                continue
            prob = 0.0
            if params.protocol in ("imitation", "combined"):
                mu = imitation_migration_prob(
                    s.path_lat[p], s.after[p, q], thr_bounds, params.lam,
                    params.use_nu_threshold, params.elasticity_damping,
                )
                w = s.x[q] / size * mu
                prob += w if params.protocol == "imitation" else 0.5 * w
            if params.protocol in ("exploration", "combined"):
                mu = exploration_migration_prob(
                    s.path_lat[p], s.after[p, q], bounds, params.lam, pe - ps, game.n
                )
                w = mu / (pe - ps)
                prob += w if params.protocol == "exploration" else 0.5 * w
            if prob > 0:
                dist[int(q)] = prob
        stay = 1.0 - sum(dist.values())
        out[int(p)] = [(int(p), stay)] + sorted(dist.items())
    return out


def exact_round_expectation(
    game: CongestionGame, x, params: ProtocolParams, max_outcomes: int = 1 << 20
) -> tuple[float, float]:
    """Exact ``(E[dPhi], E[V])`` of one round by enumerating all joint decisions."""
    state = as_state(game, x)
    outcomes = player_outcomes(game, state, params)
    per_player = []
    for p in np.flatnonzero(state.x):
        per_player += [outcomes[int(p)]] * int(state.x[p])
    total = math.prod(len(o) for o in per_player)
    if total > max_outcomes:
        raise ValueError(f"{total} joint outcomes exceed the enumeration cap {max_outcomes}")
    k = game.num_strategies
    origins = [p for p in np.flatnonzero(state.x) for _ in range(int(state.x[p]))]
    combos, probs = [], []
    for choice in itertools.product(*per_player):
        mv = np.zeros((k, k), dtype=np.int64)
        prob = 1.0
        for origin, (dest, pr) in zip(origins, choice):
            prob *= pr
            if dest != origin:
                mv[origin, dest] += 1
        combos.append(mv)
        probs.append(prob)
    dphi, virtual = potential_changes(game, state, np.array(combos))
    probs = np.array(probs)
    return float(probs @ dphi), float(probs @ virtual)
