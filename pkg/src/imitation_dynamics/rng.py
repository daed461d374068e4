"""Counter-based randomness keyed by ``(seed, round, player, lane)``.

Every random number a player uses in a round is a pure function of the seed,
the round index, the player's slot and a small lane number.  Nothing is
consumed from a shared stream, so results do not depend on evaluation order
or on how the player range is split across workers.

The mixing function is the SplitMix64 finalizer; ``word(key, i, lane)`` is
element ``4*i + lane`` of the SplitMix64 sequence started at ``key``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_ROUND_GAMMA = 0xD1B54A32D192ED03

LANE_MIGRATE = 0
LANE_SAMPLE = 1
LANE_COIN = 2

_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def stream_key(seed: int, round_index: int) -> int:
    """64-bit key of the per-round stream."""
    base = mix64((int(seed) & MASK) * GOLDEN + GOLDEN)
    return mix64(base + (int(round_index) & MASK) * _ROUND_GAMMA)


def word(key: int, player: int, lane: int) -> int:
    return mix64(key + (4 * int(player) + int(lane) + 1) * GOLDEN)


def uniform(key: int, player: int, lane: int) -> float:
    return (word(key, player, lane) >> 11) * _INV_2_53


def uniforms(key: int, players: np.ndarray, lane: int) -> np.ndarray:
    """Vectorised :func:`uniform` over an array of player slots."""
    ctr = np.asarray(players, dtype=np.uint64) * np.uint64(4) + np.uint64(lane + 1)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + ctr * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


@njit(cache=True, inline="always")
def nb_uniform(key, player, lane):
    z = key + (np.uint64(4) * np.uint64(player) + np.uint64(lane + 1)) * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    z = z ^ (z >> np.uint64(31))
    return np.float64(z >> np.uint64(11)) * _INV_2_53
