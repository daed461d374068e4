# Rounds until at most 10% of the players sit on paths that are 10% too expensive
# or too cheap, for growing player counts on the same eight links.
import math

import numpy as np

from imitation_dynamics import ProtocolParams
from imitation_dynamics.analysis import EquilibriumParams
from imitation_dynamics.experiments import loglinear_fit, sweep
from imitation_dynamics.generators import linear_singleton

game = linear_singleton(np.linspace(1.0, 4.0, 8), n=1024)
ns = [2**k for k in range(10, 16)]
rows = sweep(game, "n", ns, ProtocolParams(seed=0), EquilibriumParams(0.1, 0.1), replicates=6)

for r in rows:
    s = r.as_dict()
    print(f"n = {int(r.value):6d}   median {s['median']:7.1f}   mean {s['mean']:7.1f}   95% CI [{s['ci_low']:.0f}, {s['ci_high']:.0f}]")

c1, c2 = loglinear_fit(ns, [r.as_dict()["median"] for r in rows])
print(f"median rounds ~ {c1:.1f} * log(n) + {c2:.0f}")
print("prediction at n = 2^20:", round(c1 * math.log(2**20) + c2))
