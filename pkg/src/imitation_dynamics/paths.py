"""Strategy spaces: simple s-t paths of a directed network, parallel links."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import CongestionGame, InvalidGameError, LatencyFunction

DEFAULT_PATH_CAP = 10**6


class EmptyStrategySpaceError(InvalidGameError):
    """The sink is unreachable from the source."""


class PathExplosionError(InvalidGameError):
    """More simple paths than the caller allowed."""


@dataclass(frozen=True)
class Network:
    """Directed multigraph; edge ``i`` is ``arcs[i] = (tail, head)``."""

    num_vertices: int
    arcs: tuple[tuple[int, int], ...]
    source: int
    sink: int

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple((int(a), int(b)) for a, b in self.arcs))
        for a, b in self.arcs:
            if not (0 <= a < self.num_vertices and 0 <= b < self.num_vertices):
                raise InvalidGameError(f"arc ({a}, {b}) references an unknown vertex")
        if not (0 <= self.source < self.num_vertices and 0 <= self.sink < self.num_vertices):
            raise InvalidGameError("source and sink must be vertices")
        if self.source == self.sink:
            raise InvalidGameError("source and sink must differ")

    @classmethod
    def parallel_links(cls, m: int) -> "Network":
        return cls(2, tuple((0, 1) for _ in range(m)), 0, 1)


def enumerate_paths(net: Network, cap: int = DEFAULT_PATH_CAP) -> list[tuple[int, ...]]:
    """All simple s-t paths as sorted edge-id tuples, in lexicographic order.

    Walks with the same edge set collapse into one strategy.
    """
    out_arcs: list[list[int]] = [[] for _ in range(net.num_vertices)]
    for i, (a, _) in enumerate(net.arcs):
        out_arcs[a].append(i)

    found: set[tuple[int, ...]] = set()
    on_path = [False] * net.num_vertices
    used: list[int] = []
    # iterative DFS: stack of (vertex, next arc position)
    on_path[net.source] = True
    stack = [(net.source, 0)]
    while stack:
        v, pos = stack[-1]
        if pos == len(out_arcs[v]):
            stack.pop()
            on_path[v] = False
            if used:
                used.pop()
            continue
        stack[-1] = (v, pos + 1)
        e = out_arcs[v][pos]
        w = net.arcs[e][1]
        if on_path[w]:
            continue
        if w == net.sink:
            found.add(tuple(sorted(used + [e])))
            if len(found) > cap:
                raise PathExplosionError(f"more than {cap} simple paths; raise the cap")
            continue
        on_path[w] = True
        used.append(e)
        stack.append((w, 0))
    if not found:
        raise EmptyStrategySpaceError("no path from source to sink")
    return sorted(found)


def network_game(
    net: Network, latencies: Sequence[LatencyFunction], n: int, cap: int = DEFAULT_PATH_CAP
) -> CongestionGame:
    if len(latencies) != len(net.arcs):
        raise InvalidGameError("one latency function per arc required")
    return CongestionGame(latencies, enumerate_paths(net, cap), n, kind="network")


def singleton_game(latencies: Sequence[LatencyFunction], n: int) -> CongestionGame:
    """Parallel links: strategy ``i`` is ``{edge i}``."""
    if not latencies:
        raise InvalidGameError("at least one latency function required")
    return CongestionGame(latencies, [(i,) for i in range(len(latencies))], n, kind="singleton")
