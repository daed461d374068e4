# Two parallel links, l1(x) = 3x and l2(x) = x, four players all on link 1.
# Imitation alone can only copy strategies somebody already uses, so it is stuck.
# Exploration samples links directly and finds the cheap one.
import numpy as np

from imitation_dynamics import ProtocolParams, run
from imitation_dynamics.analysis import is_imitation_stable, is_nash
from imitation_dynamics.generators import linear_singleton

game = linear_singleton([3.0, 1.0], n=4)
start = [4, 0]
print("imitation-stable at start:", is_imitation_stable(game, start))
print("Nash at start:", is_nash(game, start))

for protocol in ("imitation", "exploration", "combined"):
    trace = run(game, start, ProtocolParams(protocol=protocol, seed=1, round_limit=50_000), stop="nash")
    print(f"{protocol:12s} reached Nash: {trace.converged!s:5s} after {trace.rounds:6d} rounds, final {trace.final_state.x}")

# the trace keeps one row per round; rounds without migrations repeat the last values
trace = run(game, start, ProtocolParams(protocol="exploration", seed=1, round_limit=50_000), stop="nash")
moves = np.flatnonzero(trace.column("migrations"))
print("rounds with migrations:", moves.tolist())
print("potential along the way:", trace.column("potential")[np.r_[0, moves]].tolist())
