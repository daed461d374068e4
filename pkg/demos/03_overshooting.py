# Link 1 has a large constant latency, link 2 is x^4 and lightly loaded.
# Players on link 1 all see the same big gain.  Without the 1/d factor in the
# migration probability too many of them jump at once and link 2 overshoots.
import numpy as np

from imitation_dynamics import ProtocolParams
from imitation_dynamics.dynamics import replay_rounds
from imitation_dynamics.generators import build_overshoot_pair

c, d, n, x2 = 1.2e8, 4, 10_000, 100
game, state = build_overshoot_pair(c, d, n, x2)
b = c - x2**d
lam = ProtocolParams().lam
l2 = game.edges[1]

for damping in (True, False):
    params = ProtocolParams(seed=3, elasticity_damping=damping)
    moves = replay_rounds(game, state, params, replays=10_000)
    joined = moves[:, 0, 1]
    increase = np.array([l2(x2 + k) for k in joined]) - l2(x2)
    label = "damped" if damping else "undamped"
    print(f"{label:9s} mean joiners {joined.mean():.4f}   mean increase of l2 {increase.mean():10.0f}   in units of lambda*b: {increase.mean() / (lam * b):.2f}")
