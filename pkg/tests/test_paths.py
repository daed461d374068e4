import itertools

import numpy as np
import pytest

from imitation_dynamics import LatencyFunction, Network, compute_bounds, enumerate_paths, network_game, singleton_game
from imitation_dynamics.analysis import is_imitation_stable
from imitation_dynamics.core import CongestionGame
from imitation_dynamics.paths import EmptyStrategySpaceError, PathExplosionError


def is_simple_st_path(net, edges):
    """Follow the arcs from the source; they must form one simple walk to the sink."""
    by_tail = {}
    for e in edges:
        a, _ = net.arcs[e]
        if a in by_tail:
            return False
        by_tail[a] = e
    v, seen, used = net.source, {net.source}, 0
    while v != net.sink:
        if v not in by_tail:
            return False
        v = net.arcs[by_tail[v]][1]
        if v in seen:
            return False
        seen.add(v)
        used += 1
    return used == len(edges)


def brute_force_paths(net):
    m = len(net.arcs)
    return sorted(
        s for r in range(1, m + 1) for s in itertools.combinations(range(m), r) if is_simple_st_path(net, s)
    )


def test_parallel_links():
    assert enumerate_paths(Network.parallel_links(2)) == [(0,), (1,)]


def test_two_hop_diamond():
    net = Network(4, [(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3)
    assert enumerate_paths(net) == [(0, 2), (1, 3)]


def test_disconnected():
    with pytest.raises(EmptyStrategySpaceError):
        enumerate_paths(Network(3, [(0, 1), (2, 1)], 0, 2))


def test_cap():
    # a chain of 8 diamonds has 256 paths
    arcs = []
    for i in range(8):
        arcs += [(i, i + 1), (i, i + 1)]
    net = Network(9, arcs, 0, 8)
    assert len(enumerate_paths(net)) == 256
    with pytest.raises(PathExplosionError):
        enumerate_paths(net, cap=100)


def test_cycles_are_skipped():
    net = Network(3, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2)], 0, 2)
    assert enumerate_paths(net) == brute_force_paths(net)


@pytest.mark.parametrize("seed", range(25))
def test_random_graphs_match_subset_oracle(seed):
    rs = np.random.default_rng(seed)
    nv = int(rs.integers(3, 6))
    m = int(rs.integers(3, 11))
    arcs = []
    while len(arcs) < m:
        a, b = rs.integers(0, nv, 2)
        if a != b:
            arcs.append((int(a), int(b)))
    net = Network(nv, arcs, 0, nv - 1)
    expect = brute_force_paths(net)
    if not expect:
        with pytest.raises(EmptyStrategySpaceError):
            enumerate_paths(net)
    else:
        got = enumerate_paths(net)
        assert got == expect
        assert all(is_simple_st_path(net, p) for p in got)


def test_network_game_deterministic_order():
    net = Network(4, [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0, 3)
    lat = [LatencyFunction.linear(1)] * 5
    a = network_game(net, lat, 3)
    b = network_game(net, lat, 3)
    assert a.strategies == b.strategies == ((0, 2), (0, 3, 4), (1, 3))
    assert a.kind == "network"


def test_single_link_always_stable():
    g = singleton_game([LatencyFunction.linear(2)], 7)
    assert g.num_strategies == 1
    assert is_imitation_stable(g, [7])


def test_two_links_match_explicit():
    lat = [LatencyFunction.linear(1), LatencyFunction.linear(2)]
    a = singleton_game(lat, 3)
    b = CongestionGame(lat, [(0,), (1,)], 3)
    assert a.strategies == b.strategies
    assert np.array_equal(a.lat_table, b.lat_table)


def test_large_random_singleton():
    rs = np.random.default_rng(0)
    g = singleton_game([LatencyFunction.linear(a) for a in rs.uniform(1, 2, 100)], 10_000)
    b = compute_bounds(g)
    assert b.d == 1
    assert b.ell_min >= 1
