# Linear links a = (1, 2, 4) and 1000 players.  Every imitation-stable state that
# keeps all links in use costs at most three times the fractional optimum n/A.
from imitation_dynamics import ProtocolParams
from imitation_dynamics.analysis import fractional_optimum
from imitation_dynamics.experiments import price_of_imitation
from imitation_dynamics.generators import linear_singleton

game = linear_singleton([1.0, 2.0, 4.0], n=1000)
x_frac, big_a, useless = fractional_optimum(game)
print("fractional optimum:", x_frac.round(1), " n/A =", round(game.n / big_a, 2), " useless:", sorted(useless))

report = price_of_imitation(game, ProtocolParams(seed=0), replicates=20)
print("runs:", report.runs, " all links used:", report.all_used_runs, " emptied:", report.emptied_runs)
print("bounds hold in every checked run:", all(report.bounds_hold))
print("mean cost ratio:", round(report.mean_ratio, 5), " worst:", round(max(report.ratios), 5))

# a link with slope 100 is not worth using for 5 players
x_frac, big_a, useless = fractional_optimum(linear_singleton([1.0, 100.0], n=5))
print("\nwith a = (1, 100), n = 5:", x_frac.round(3), "useless:", sorted(useless))
