"""
Where does a controller pick each action?
=========================================

Split a box of states into pieces on which a small network always picks
the same action.
"""

import numpy as np

from mosaic.extraction import find_action_subregions, partition_consistent
from mosaic.geometry import Box, box_volume
from mosaic.network import Layer, Network, policy_action

# a one-input, two-action network: action 0 for x > 0.3, action 1 below
net = Network((Layer.affine([[1.0], [-1.0]], [-0.3, 0.3]),), 1)
box = Box([-1.0], [1.0])

# branch and bound over the action layer for action 0
part = find_action_subregions(net, 0, box, eps=2.0 ** -6)
print("sat pieces      ", len(part.sat), sum(box_volume(b) for b in part.sat))
print("unsat pieces    ", len(part.unsat), sum(box_volume(b) for b in part.unsat))
print("undecided pieces", len(part.undecided), [b.pairs() for b in part.undecided])

# the joint partition tags each piece with the actions it may take
for piece, tag in partition_consistent(net, box, 2.0 ** -6):
    print(piece.pairs(), "->", tag)

# sampled points agree with the tags
xs = np.linspace(-1, 1, 9)[:, None]
for x, a in zip(xs[:, 0], policy_action(net, xs)):
    print(f"x = {x:+.2f}: action {a}")
