"""
How much do controller faults cost?
===================================

Compare the failure probability of the pendulum controller under no
faults, dropped actions and sticky actions, on one concrete state and on
an abstract region around it.
"""

from importlib import resources

from mosaic.abstraction import build_mdp
from mosaic.environment import Pendulum
from mosaic.faults import dropped, fault_free, sticky
from mosaic.geometry import Box
from mosaic.model_check import concrete_reach, max_reach
from mosaic.network import load_network

net = load_network(resources.files("mosaic") / "fixtures" / "pendulum.json")
# a tighter failure threshold than the default makes the faults visible
env = Pendulum(theta_max=0.4)
k = 5
# at this edge state the controller itself pushes the pole over, so a dropped
# action can only help while a repeated one changes nothing
start = (0.35, 0.3)
region = Box([0.3, 0.25], [0.35, 0.35])

for f in (fault_free(2), dropped(0.2, 2), sticky(0.2, 2)):
    exact = concrete_reach(net, env, f, start, k)
    mdp = build_mdp(net, env, f, [region], k, [0.025, 0.05])
    bound = max_reach(mdp, k)[mdp.initial[0]]
    print(f"{f.kind:8s} P(fail | {start}) = {exact:.4f}   region bound = {bound:.4f}   "
          f"({len(mdp)} abstract states)")
