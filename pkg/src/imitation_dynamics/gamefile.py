"""Plain-text game files and generator spec strings.

A game file has sections ``[edges]`` (one latency per line, ``poly a0 a1 ...``
or ``table v0 v1 ...``), ``[strategies]`` (one whitespace-separated edge-id
list per line) and ``[players]`` (the player count).  Optional sections:
``[kind]`` (``singleton``, ``network`` or ``explicit``), ``[groups]`` (a line of
class ids per strategy and a line of class sizes) and ``[state]`` (an initial
player count per strategy).  ``#`` starts a comment.

Example::

    [edges]
    poly 0 1
    table 0 2 4 6 8
    [strategies]
    0
    1
    [players]
    4
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CongestionGame, GameState, InvalidGameError, LatencyFunction
from .generators import (
    ThresholdGameSpec,
    build_overshoot_pair,
    build_sampling_lowerbound,
    build_threshold_game,
    linear_singleton,
    random_singleton,
    random_state,
    scaled_singleton,
    threshold_initial_state,
)

SECTIONS = ("edges", "strategies", "players", "kind", "groups", "state")


class GameFileError(InvalidGameError):
    """Malformed game file or generator spec."""


@dataclass
class LoadedGame:
    game: CongestionGame
    state: GameState | None = None
    threshold: ThresholdGameSpec | None = None
    s_init: tuple[bool, ...] | None = None


def _number(tok: str, where: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise GameFileError(f"{where}: not a number: {tok!r}") from None


def _integer(tok: str, where: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GameFileError(f"{where}: not an integer: {tok!r}") from None


def _parse_latency(tokens: list[str], where: str) -> LatencyFunction:
    kind, args = tokens[0], [_number(t, where) for t in tokens[1:]]
    if not args:
        raise GameFileError(f"{where}: latency needs coefficients")
    try:
        if kind == "poly":
            return LatencyFunction.poly(*args)
        if kind == "table":
            return LatencyFunction.table(args)
    except ValueError as exc:
        raise GameFileError(f"{where}: {exc}") from None
    raise GameFileError(f"{where}: unknown latency kind {kind!r}")


def parse_game(text: str, source: str = "<string>") -> LoadedGame:
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in SECTIONS:
                raise GameFileError(f"{source}:{lineno}: unknown section [{current}]")
            if current in sections:
                raise GameFileError(f"{source}:{lineno}: duplicate section [{current}]")
            sections[current] = []
            continue
        if current is None:
            raise GameFileError(f"{source}:{lineno}: content before the first section")
        sections[current].append((lineno, line.split()))

    for name in ("edges", "strategies", "players"):
        if not sections.get(name):
            raise GameFileError(f"{source}: missing or empty section [{name}]")

    edges = [_parse_latency(tok, f"{source}:{ln}") for ln, tok in sections["edges"]]
    strategies = [[_integer(t, f"{source}:{ln}") for t in tok] for ln, tok in sections["strategies"]]
    ln, tok = sections["players"][0]
    if len(sections["players"]) != 1 or len(tok) != 1:
        raise GameFileError(f"{source}:{ln}: [players] holds a single integer")
    n = _integer(tok[0], f"{source}:{ln}")

    if "kind" in sections:
        kind = sections["kind"][0][1][0]
    elif all(len(s) == 1 for s in strategies) and len({s[0] for s in strategies}) == len(strategies):
        kind = "singleton"
    else:
        kind = "explicit"

    groups = group_sizes = None
    if "groups" in sections:
        rows = sections["groups"]
        if len(rows) != 2:
            raise GameFileError(f"{source}: [groups] needs a line of class ids and a line of sizes")
        groups = [_integer(t, f"{source}:{rows[0][0]}") for t in rows[0][1]]
        group_sizes = [_integer(t, f"{source}:{rows[1][0]}") for t in rows[1][1]]

    game = CongestionGame(edges, strategies, n, kind=kind, groups=groups, group_sizes=group_sizes)
    state = None
    if "state" in sections:
        ln, tok = sections["state"][0]
        state = GameState(game, [_integer(t, f"{source}:{ln}") for t in tok])
    return LoadedGame(game, state)


def load_game(path) -> LoadedGame:
    path = Path(path)
    return parse_game(path.read_text(), str(path))


def _fmt(v: float) -> str:
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


def format_game(game: CongestionGame, state=None) -> str:
    lines = ["[edges]"]
    for f in game.edges:
        lines.append(" ".join([f.kind] + [_fmt(v) for v in f.values]))
    lines.append("[strategies]")
    lines.extend(" ".join(map(str, s)) for s in game.strategies)
    lines += ["[players]", str(game.n), "[kind]", game.kind]
    if len(game.group_sizes) > 1:
        lines += ["[groups]", " ".join(map(str, game.groups)), " ".join(map(str, game.group_sizes))]
    if state is not None:
        x = state.x if isinstance(state, GameState) else np.asarray(state)
        lines += ["[state]", " ".join(map(str, x.tolist()))]
    return "\n".join(lines) + "\n"


def save_game(path, game: CongestionGame, state=None) -> None:
    Path(path).write_text(format_game(game, state))


# -- generator specs -----------------------------------------------------------

GENERATORS = ("singleton", "linear", "scaled", "overshoot", "sampling", "threshold")


def _list(value: str) -> list[float]:
    return [float(v) for v in value.split("/") if v]


def parse_generator(spec: str) -> LoadedGame:
    """Build an instance from ``name:key=value,...``; lists use ``/`` separators.

    ======================  ===================================================
    ``singleton``           ``m``, ``n``, ``lo``, ``hi``, ``degree``, ``seed``
    ``linear``              ``a`` (slopes), ``n``, ``seed`` (random start)
    ``scaled``              ``a`` (slopes of ``a*x/n``), ``n``, ``seed``
    ``overshoot``           ``c``, ``d``, ``n``, ``x2``
    ``sampling``            ``m``
    ``threshold``           ``n_base``, ``high``, ``seed``, ``tripled``
    ======================  ===================================================
    """
    name, _, rest = spec.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise GameFileError(f"generator option {item!r} is not key=value")
        opts[key.strip()] = value.strip()
    get = lambda k, default: opts.pop(k, default)  # noqa: E731
    tspec = s_init = None
    try:
        if name == "singleton":
            game, state = random_singleton(
                int(get("m", 4)),
                int(get("n", 100)),
                (float(get("lo", 1)), float(get("hi", 2))),
                int(get("degree", 1)),
                int(get("seed", 0)),
            )
        elif name in ("linear", "scaled"):
            slopes = _list(get("a", "1/2"))
            n = int(get("n", 100))
            seed = int(get("seed", 0))
            if name == "linear":
                game = linear_singleton(slopes, n)
            else:
                game = scaled_singleton([(0.0, a) for a in slopes], n)
            state = random_state(game, np.random.default_rng(seed))
        elif name == "overshoot":
            game, state = build_overshoot_pair(
                float(get("c", 100)), int(get("d", 4)), int(get("n", 10_000)), int(get("x2", 10))
            )
        elif name == "sampling":
            game, state = build_sampling_lowerbound(int(get("m", 3)))
        elif name == "threshold":
            rng = np.random.default_rng(int(get("seed", 0)))
            tspec = ThresholdGameSpec.random(
                int(get("n_base", 3)), rng, int(get("high", 10)), get("tripled", "1") not in ("0", "false")
            )
            game = build_threshold_game(tspec)
            s_init = tuple(bool(v) for v in rng.integers(0, 2, tspec.n_base))
            state = threshold_initial_state(game, tspec, s_init)
        else:
            raise GameFileError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
    except GameFileError:
        raise
    except ValueError as exc:
        raise GameFileError(f"generator {spec!r}: {exc}") from None
    if opts:
        raise GameFileError(f"generator {name!r} does not take {', '.join(sorted(opts))}")
    return LoadedGame(game, state, tspec, s_init)
