"""Replicated experiments: convergence sweeps, extinction, price of imitation,
sequential lower-bound probes and martingale audits."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .analysis import EquilibriumParams
from .analysis.social import fractional_optimum, linear_slopes, social_cost, stable_cost_bounds_check
from .core import CongestionGame, GameState, InvalidGameError, Snapshot
from .dynamics import ProtocolParams, improving_imitations, run, sequential_imitation_step
from .generators import (
    ThresholdGameSpec,
    build_threshold_game,
    random_state,
    threshold_initial_state,
    tripled_invariant_violations,
)

log = logging.getLogger(__name__)


def replicate_seed(seed: int, replicate: int) -> int:
    """Independent 63-bit seed for replicate ``replicate`` of a batch."""
    return int(np.random.SeedSequence([int(seed), int(replicate)]).generate_state(1, np.uint64)[0] >> 1)


def replicate_state(game: CongestionGame, seed: int, replicate: int) -> GameState:
    return random_state(game, np.random.default_rng([int(seed), int(replicate), 1]))


def map_replicates(fn: Callable[[int], object], replicates: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(replicates - 1)]``, evaluated on up to ``workers`` threads."""
    if workers <= 1 or replicates <= 1:
        return [fn(r) for r in range(replicates)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replicates)))


def summarize(values: Sequence[float]) -> dict:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"count": 0, "median": math.nan, "mean": math.nan, "ci_low": math.nan, "ci_high": math.nan}
    half = 1.96 * v.std(ddof=1) / math.sqrt(v.size) if v.size > 1 else 0.0
    return {
        "count": int(v.size),
        "median": float(np.median(v)),
        "mean": float(v.mean()),
        "ci_low": float(v.mean() - half),
        "ci_high": float(v.mean() + half),
    }


# -- sweeps --------------------------------------------------------------------


@dataclass
class SweepRow:
    value: float
    rounds: list[int]
    converged: int

    def as_dict(self) -> dict:
        return {"value": self.value, "converged": self.converged, **summarize(self.rounds)}


SWEEP_AXES = ("n", "lambda", "epsilon", "delta")


def sweep(
    game: CongestionGame,
    axis: str,
    values: Sequence[float],
    params: ProtocolParams,
    eq: EquilibriumParams,
    replicates: int = 10,
) -> list[SweepRow]:
    """Rounds to a ``(delta, epsilon, nu)``-equilibrium for each axis value.

    Replicate ``r`` starts from a uniformly random state and uses the derived
    seed :func:`replicate_seed` ``(params.seed, r)``; the same seeds are reused
    across axis values.  Replicates are spread over ``params.threads``
    workers.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    rows = []
    for value in values:
        g, p, e = game, params, eq
        if axis == "n":
            g = game.with_players(int(value))
        elif axis == "lambda":
            p = replace(params, lam=float(value))
        elif axis == "epsilon":
            e = replace(eq, epsilon=float(value))
        else:
            e = replace(eq, delta=float(value))
        p1 = replace(p, threads=1)

        def one(r, g=g, p1=p1, e=e):
            trace = run(g, replicate_state(g, params.seed, r), replace(p1, seed=replicate_seed(p1.seed, r)), stop=e)
            return trace.converged, trace.rounds

        results = map_replicates(one, replicates, params.threads)
        ok = sum(c for c, _ in results)
        rounds = [t for c, t in results if c]
        log.info("sweep %s=%s: %d/%d converged", axis, value, ok, replicates)
        rows.append(SweepRow(float(value), rounds, ok))
    return rows


def loglinear_fit(ns: Sequence[float], medians: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``median ~ c1 * log(n) + c2``; returns ``(c1, c2)``."""
    c1, c2 = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.asarray(medians, dtype=float), 1)
    return float(c1), float(c2)


# -- extinction ----------------------------------------------------------------


def extinction_floor(game: CongestionGame) -> np.ndarray:
    """Per-link floor ``n * y_e / 2`` for linear singleton games.

    ``y_e`` is the largest share with ``l_e(y_e) <= OPT / 4`` and
    ``y_e <= 1/m``, where ``OPT`` is the fractional optimum of the average
    latency.  For ``l_e(x) = a_e x`` this is ``min(x_frac_e / (4 n), 1/m)``.
    """
    x_frac, _, _ = fractional_optimum(game)
    y = np.minimum(x_frac / (4.0 * game.n), 1.0 / game.num_edges)
    return game.n * y / 2.0


@dataclass
class ExtinctionReport:
    runs: int
    rounds: int
    extinct_runs: int
    min_load: list[int]
    floor: list[float] | None = None
    min_load_per_run: list[list[int]] = field(default_factory=list)

    @property
    def above_floor(self) -> bool | None:
        if self.floor is None:
            return None
        return bool(np.all(np.array(self.min_load) > np.array(self.floor)))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["above_floor"] = self.above_floor
        return d


def extinction_experiment(
    game: CongestionGame, params: ProtocolParams, replicates: int, rounds: int
) -> ExtinctionReport:
    """Run ``replicates`` random starts for ``rounds`` rounds and track empty links."""
    if game.kind != "singleton":
        raise InvalidGameError("extinction experiments need a singleton game")

    def one(r):
        p = replace(params, seed=replicate_seed(params.seed, r), round_limit=rounds, threads=1)
        return run(game, replicate_state(game, params.seed, r), p, stop="round_limit").min_edge_load

    per_run = [low.tolist() for low in map_replicates(one, replicates, params.threads)]
    extinct = sum(int(min(low) == 0) for low in per_run)
    overall = np.min(np.array(per_run), axis=0).tolist()
    try:
        floor = extinction_floor(game).tolist()
    except InvalidGameError:
        floor = None
    return ExtinctionReport(replicates, rounds, extinct, overall, floor, per_run)


# -- price of imitation --------------------------------------------------------


@dataclass
class PriceOfImitationReport:
    runs: int
    optimum: float
    ratios: list[float]
    all_used_runs: int
    emptied_runs: int
    bounds_hold: list[bool]
    non_converged: int
    useless: list[int]
    min_fractional_load: float

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios)) if self.ratios else math.nan

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mean_ratio"] = self.mean_ratio
        d["ratio_summary"] = summarize(self.ratios)
        d["log_n"] = math.log(max(2, int(round(self.optimum))))
        return d


def price_of_imitation(game: CongestionGame, params: ProtocolParams, replicates: int) -> PriceOfImitationReport:
    """Replicated runs to imitation-stable states with ``nu = a_max``.

    Every terminal state with all links used is checked against
    ``n/A <= SC <= 3 n/A``; runs that emptied a link are reported separately.
    """
    x_frac, big_a, useless = fractional_optimum(game)
    if useless:
        log.warning("useless resources present: %s", sorted(useless))
    a_max = float(linear_slopes(game).max())
    p0 = replace(params, nu=a_max, use_nu_threshold=True, protocol="imitation")
    opt = game.n / big_a
    ratios, bounds_ok = [], []
    emptied = non_conv = 0

    def one(r):
        p = replace(p0, seed=replicate_seed(params.seed, r), threads=1)
        return run(game, replicate_state(game, params.seed, r), p, stop="imitation_stable")

    for trace in map_replicates(one, replicates, params.threads):
        final = trace.final_state
        if not trace.converged:
            non_conv += 1
            continue
        ratios.append(social_cost(game, final) / opt)
        if np.any(final.loads == 0) or useless:
            emptied += int(np.any(final.loads == 0))
            continue
        bounds_ok.append(stable_cost_bounds_check(game, final))
    return PriceOfImitationReport(
        runs=replicates,
        optimum=opt,
        ratios=ratios,
        all_used_runs=len(bounds_ok),
        emptied_runs=emptied,
        bounds_hold=bounds_ok,
        non_converged=non_conv,
        useless=sorted(useless),
        min_fractional_load=float(x_frac.min()),
    )


# -- sequential lower-bound probe ----------------------------------------------


@dataclass
class LowerBoundReport:
    n_base: int
    steps: int
    stable: bool
    violations: list[tuple[int, list[int]]]

    @property
    def invariant_holds(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        d = asdict(self)
        d["invariant_holds"] = self.invariant_holds
        return d


def sequential_probe(
    game: CongestionGame,
    start: GameState,
    seed: int = 0,
    max_steps: int = 10**6,
    check: Callable[[GameState], list[int]] = tripled_invariant_violations,
) -> tuple[int, bool, list[tuple[int, list[int]]]]:
    """Sequential imitation from ``start`` with an invariant check after every step."""
    violations = []
    bad = check(start)
    if bad:
        violations.append((0, bad))
    snap = Snapshot.of(game, start)
    steps = 0
    while steps < max_steps and improving_imitations(game, snap).any():
        state = sequential_imitation_step(game, snap.state, seed, steps, snap)
        steps += 1
        bad = check(state)
        if bad:
            violations.append((steps, bad))
        snap = Snapshot.of(game, state)
    stable = not improving_imitations(game, snap).any()
    return steps, stable, violations


def lowerbound_experiment(
    spec: ThresholdGameSpec,
    s_init: Sequence[bool] | None = None,
    seed: int = 0,
    max_steps: int = 10**6,
) -> LowerBoundReport:
    """Sequential imitation from the canonical tripled start of ``spec``.

    ``s_init`` defaults to a random in/out choice per base player drawn from
    ``seed``.
    """
    game = build_threshold_game(spec)
    if s_init is None:
        s_init = np.random.default_rng([seed, 2]).integers(0, 2, spec.n_base).astype(bool)
    start = threshold_initial_state(game, spec, list(s_init))
    steps, stable, violations = sequential_probe(game, start, seed, max_steps)
    return LowerBoundReport(spec.n_base, steps, stable, violations)

