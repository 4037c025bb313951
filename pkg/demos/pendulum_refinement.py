"""
Refining the pendulum safe set
==============================

Build the abstraction for a grid of initial cells, then split the unsafe
cells a few times and watch the safe volume grow. Writes a heatmap to
``pendulum_heatmap.svg``.
"""

from importlib import resources

from mosaic.abstraction import build_mdp, initial_grid
from mosaic.environment import Pendulum
from mosaic.faults import sticky
from mosaic.geometry import box_volume
from mosaic.model_check import max_reach
from mosaic.network import load_network
from mosaic.refinement import initial_results, refine_iter
from mosaic.results import safe_volume, to_svg, volume_histogram

net = load_network(resources.files("mosaic") / "fixtures" / "pendulum.json")
env = Pendulum(theta_max=0.4)
f = sticky(0.2, 2)
k, p_safe = 5, 0.2
cells = initial_grid(env, [0.175, 0.25])
eps = [0.175, 0.25]

mdp = build_mdp(net, env, f, cells, k, eps)
results = initial_results(mdp, max_reach(mdp, k), p_safe, eps)
total = box_volume(env.init_region)
print(f"{len(mdp)} states; safe fraction {safe_volume(results, p_safe) / total:.3f}")

# each round splits every unsafe cell in two and rebuilds from the halves
for i, results in enumerate(refine_iter(net, env, f, results, k, eps, p_safe, 6,
                                        refine_eps=[w / 32 for w in env.init_region.widths])):
    print(f"round {i + 1}: {len(results):4d} regions, safe fraction "
          f"{safe_volume(results, p_safe) / total:.3f}")

for (lo, hi), vol in volume_histogram(results, [0, 0.2, 0.5, 1.0]):
    print(f"bound in [{lo}, {hi}): volume {vol:.4f}")

with open("pendulum_heatmap.svg", "w") as fh:
    fh.write(to_svg(results, env.state_labels))
