"""Compiled per-player loop of one concurrent round."""

import numpy as np
from numba import njit

from .rng import LANE_COIN, LANE_MIGRATE, LANE_SAMPLE, nb_uniform

MODE_IMITATION = 0
MODE_EXPLORATION = 1
MODE_COMBINED = 2


@njit(cache=True, nogil=True)
def round_moves(x, cum, groups, gpath_start, gpath_stop, m_imit, m_expl, mode, key, lo, hi):
    """Move counts ``moves[P, Q]`` of players with slots in ``[lo, hi)``.

    Players are laid out in path order: path ``P`` owns slots
    ``cum[P]..cum[P+1]-1``.  A player can only move if its migration uniform
    falls below the largest probability in its row, so the sampling lane is
    evaluated lazily; the outcome is identical either way.
    """
    k = x.shape[0]
    moves = np.zeros((k, k), dtype=np.int64)
    for p in range(k):
        a = max(cum[p], lo)
        b = min(cum[p + 1], hi)
        if a >= b:
            continue
        rowmax = 0.0
        if mode != MODE_EXPLORATION:
            for q in range(k):
                if m_imit[p, q] > rowmax:
                    rowmax = m_imit[p, q]
        if mode != MODE_IMITATION:
            for q in range(k):
                if m_expl[p, q] > rowmax:
                    rowmax = m_expl[p, q]
        if rowmax <= 0.0:
            continue
        g = groups[p]
        ps = gpath_start[g]
        pe = gpath_stop[g]
        first = cum[ps]
        size = cum[pe] - first
        for i in range(a, b):
            u = nb_uniform(key, i, LANE_MIGRATE)
            if u >= rowmax:
                continue
            explore = mode == MODE_EXPLORATION
            if mode == MODE_COMBINED:
                explore = nb_uniform(key, i, LANE_COIN) >= 0.5
            s = nb_uniform(key, i, LANE_SAMPLE)
            if explore:
                q = ps + min(int(s * (pe - ps)), pe - ps - 1)
                prob = m_expl[p, q]
            else:
                j = first + min(int(s * size), size - 1)
                # last path whose slot range starts at or before j
                q = np.searchsorted(cum[ps:pe + 1], j, side="right") - 1 + ps
                prob = m_imit[p, q]
            if u < prob:
                moves[p, q] += 1
    return moves
