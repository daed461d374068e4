"""Command-line entry point ``imitate-dyn``.

Subcommands ``run``, ``sweep``, ``extinction``, ``poi``, ``lowerbound`` and
``audit``.  Games come from a game file (``--game``) or a generator spec
(``--gen name:key=value,...``).  Exit status: 0 on success or convergence,
2 when a run hits the round limit or a reported check fails, 1 on input
errors.  Set ``IMITATE_DYN_LOG`` to a logging level name for diagnostics.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import EquilibriumParams
from .analysis.martingale import martingale_test
from .analysis.social import social_cost
from .core import GameState
from .dynamics import DEFAULT_LAMBDA, PROTOCOLS, ProtocolParams, run
from .experiments import (
    SWEEP_AXES,
    extinction_experiment,
    lowerbound_experiment,
    price_of_imitation,
    sweep,
)
from .gamefile import LoadedGame, load_game, parse_generator
from .generators import random_state

log = logging.getLogger("imitation_dynamics")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_LIMIT = 2

STOP_CHOICES = ("imitation_stable", "nash", "round_limit", "approx")


class InputError(Exception):
    pass


@dataclass
class ExperimentConfig:
    game_file: str | None
    generator: str | None
    params: ProtocolParams
    stop: str
    eq: EquilibriumParams
    replicates: int
    out: str | None

    def __post_init__(self):
        if (self.game_file is None) == (self.generator is None):
            raise InputError("give exactly one of --game and --gen")
        if self.replicates < 1:
            raise InputError("--replicates must be at least 1")

    def load(self) -> LoadedGame:
        if self.game_file is not None:
            try:
                return load_game(self.game_file)
            except OSError as exc:
                raise InputError(f"cannot read {self.game_file}: {exc.strerror or exc}") from None
        return parse_generator(self.generator)

    @property
    def stop_condition(self):
        return self.eq if self.stop == "approx" else self.stop


def _start(loaded: LoadedGame, seed: int) -> GameState:
    if loaded.state is not None:
        return loaded.state
    return random_state(loaded.game, np.random.default_rng([seed, 0]))


def _nu_guard(value: str) -> tuple[bool, float | None]:
    if value in ("on", "off"):
        return value == "on", None
    try:
        nu = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--nu-guard takes on, off or a number") from None
    return True, nu


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.ndarray, frozenset, set)):
        return sorted(obj) if not isinstance(obj, np.ndarray) else obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(report: dict, out: str | None, stream=None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)


# -- commands ------------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig) -> int:
    """Run once; trace CSV goes to ``--out`` (or stdout) and the summary to stdout (or stderr)."""
    loaded = cfg.load()
    game = loaded.game
    trace = run(game, _start(loaded, cfg.params.seed), cfg.params, cfg.stop_condition, eq=cfg.eq)
    final = trace.final_state
    summary = {
        "converged": bool(trace.converged),
        "rounds": trace.rounds,
        "stop": trace.stop,
        "protocol": cfg.params.protocol,
        "seed": cfg.params.seed,
        "final_potential": trace.rows[-1][1],
        "final_state": final.x.tolist(),
    }
    if game.kind == "singleton":
        summary["final_social_cost"] = social_cost(game, final)
    if cfg.out:
        trace.to_csv(cfg.out)
        _emit(summary, None)
    else:
        trace.to_csv(sys.stdout)
        _emit(summary, None, sys.stderr)
    return EXIT_OK if trace.converged else EXIT_LIMIT


def cmd_sweep(cfg: ExperimentConfig, axis: str, values: Sequence[float]) -> int:
    loaded = cfg.load()
    rows = sweep(loaded.game, axis, values, cfg.params, cfg.eq, cfg.replicates)
    table = [r.as_dict() for r in rows]
    _emit({"axis": axis, "replicates": cfg.replicates, "rows": table}, cfg.out)
    return EXIT_OK if all(r.converged == cfg.replicates for r in rows) else EXIT_LIMIT


def cmd_extinction(cfg: ExperimentConfig) -> int:
    loaded = cfg.load()
    report = extinction_experiment(loaded.game, cfg.params, cfg.replicates, cfg.params.round_limit)
    out = report.as_dict()
    out.pop("min_load_per_run")
    _emit(out, cfg.out)
    return EXIT_OK


def cmd_price_of_imitation(cfg: ExperimentConfig) -> int:
    loaded = cfg.load()
    report = price_of_imitation(loaded.game, cfg.params, cfg.replicates)
    _emit(report.as_dict(), cfg.out)
    return EXIT_OK if all(report.bounds_hold) and not report.non_converged else EXIT_LIMIT


def cmd_lowerbound(cfg: ExperimentConfig) -> int:
    loaded = cfg.load()
    if loaded.threshold is None:
        raise InputError("lowerbound needs --gen threshold:...")
    report = lowerbound_experiment(loaded.threshold, loaded.s_init, cfg.params.seed, cfg.params.round_limit)
    _emit(report.as_dict(), cfg.out)
    return EXIT_OK if report.invariant_holds and report.stable else EXIT_LIMIT


def cmd_audit(cfg: ExperimentConfig) -> int:
    loaded = cfg.load()
    report = martingale_test(loaded.game, _start(loaded, cfg.params.seed), cfg.params, cfg.replicates)
    _emit(report.as_dict(), cfg.out)
    return EXIT_OK if report.passed or report.stable else EXIT_LIMIT


# -- argument parsing ----------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--game", help="game file")
    p.add_argument("--gen", help="generator spec, e.g. linear:a=1/2/4,n=1000")
    p.add_argument("--protocol", choices=PROTOCOLS, default="imitation")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--nu-guard", type=_nu_guard, default=(True, None), metavar="{on,off,NU}")
    p.add_argument("--stop", choices=STOP_CHOICES, default="imitation_stable")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--rounds", type=int, default=10_000, help="round limit")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output file")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imitate-dyn", description="Imitation dynamics in congestion games")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("run", parents=[common], help="single run with a per-round trace")
    sw = sub.add_parser("sweep", parents=[common], help="rounds to approximate equilibrium along an axis")
    sw.add_argument("--axis", choices=SWEEP_AXES, default="n")
    sw.add_argument("--values", required=True, help="comma-separated axis values")
    sub.add_parser("extinction", parents=[common], help="count runs in which a link empties")
    sub.add_parser("poi", parents=[common], help="price of imitation on linear singleton games")
    sub.add_parser("lowerbound", parents=[common], help="sequential runs on tripled threshold games")
    sub.add_parser("audit", parents=[common], help="super-martingale check of one round")
    return parser


def config_from_args(args) -> ExperimentConfig:
    guard, nu = args.nu_guard
    try:
        params = ProtocolParams(
            lam=args.lam,
            use_nu_threshold=guard,
            nu=nu,
            protocol=args.protocol,
            seed=args.seed,
            round_limit=args.rounds,
            threads=args.threads,
        )
        eq = EquilibriumParams(args.delta, args.epsilon, nu)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return ExperimentConfig(args.game, args.gen, params, args.stop, eq, args.replicates, args.out)


def _setup_logging() -> None:
    level = os.environ.get("IMITATE_DYN_LOG", "WARNING").upper()
    numeric = int(level) if level.isdigit() else getattr(logging, level, logging.WARNING)
    logging.basicConfig(level=numeric, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise InputError(f"--values must be numbers: {args.values!r}") from None
            if not values or any(math.isnan(v) for v in values):
                raise InputError("--values must list at least one number")
            return cmd_sweep(cfg, args.axis, values)
        if args.command == "extinction":
            return cmd_extinction(cfg)
        if args.command == "poi":
            return cmd_price_of_imitation(cfg)
        if args.command == "lowerbound":
            return cmd_lowerbound(cfg)
        return cmd_audit(cfg)
    except (InputError, ValueError) as exc:
        print(f"imitate-dyn: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
