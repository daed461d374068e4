# Quadratic threshold games with every base player copied three times.  Sequential
# imitation from the canonical start never puts all three copies on the same side.
import numpy as np

from imitation_dynamics.experiments import lowerbound_experiment
from imitation_dynamics.generators import ThresholdGameSpec, build_threshold_game

rng = np.random.default_rng(0)
spec = ThresholdGameSpec.random(4, rng)
game = build_threshold_game(spec)
print("weights:\n", np.array(spec.a))
print("players:", game.n, " strategies:", game.num_strategies, " resources:", game.num_edges)

steps = []
for seed in range(200):
    spec = ThresholdGameSpec.random(int(rng.integers(2, 7)), rng)
    report = lowerbound_experiment(spec, seed=seed)
    assert report.invariant_holds and report.stable
    steps.append(report.steps)
print("200 runs, invariant held in all; steps to stability: max", max(steps), " mean", round(float(np.mean(steps)), 2))
