"""Construction of the controller-execution abstraction to a fixed horizon."""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Sequence

from .environment import Environment
from .errors import BadPrecision, MemoryGuardExceeded, NoInitialStates
from .extraction import PolicyExtractor
from .faults import FaultModel
from .geometry import Box
from .mdp import AbstractMdp
from .network import Network

log = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 500_000


def build_mdp(net: Network, env: Environment, f: FaultModel, init: Sequence[Box], k: int,
              eps=None, *, extractor: PolicyExtractor | None = None,
              bound_method: str = "planet", max_states: int = DEFAULT_MAX_STATES,
              cache: bool = False) -> AbstractMdp:
    """Explore the abstraction breadth-first from ``init`` for ``k`` steps.

    Every frontier box is split into policy-consistent subregions; each
    (subregion, candidate action) pair becomes one choice whose distribution
    sends probability ``p`` to the abstract successor under each fault word.
    Successors meeting the failure set are absorbing. Raises
    :class:`MemoryGuardExceeded` once the model exceeds ``max_states``.
    """
    if not init:
        raise NoInitialStates("at least one initial box is required")
    if k < 1:
        raise ValueError("horizon must be at least 1")
    if extractor is None:
        if eps is None:
            raise BadPrecision("either eps or an extractor is required")
        extractor = PolicyExtractor(net, eps, bound_method, cache=cache)
    mdp = AbstractMdp()
    frontier = []
    for b in init:
        sid, new = mdp.add_state_ex(b, env.box_fails(b), 0)
        mdp.mark_initial(sid)
        if new and not mdp.states[sid].fail:
            frontier.append(sid)

    for t in range(k):
        nxt = []
        partitions = extractor.partition_consistent_many([mdp.states[sid].box for sid in frontier])
        for sid, partition in zip(frontier, partitions):
            images: dict = {}
            for piece, tag in partition:
                for a in tag:
                    dist = defaultdict(float)
                    outcomes = []
                    for p, w in f.outcomes(a):
                        succ = _image(env, piece, tuple(w), images)
                        tid, new = mdp.add_state_ex(succ, env.box_fails(succ), t + 1)
                        if new and not mdp.states[tid].fail:
                            nxt.append(tid)
                        dist[tid] += p
                        outcomes.append((p, w, tid))
                    mdp.add_choice(sid, [(p, tid) for tid, p in sorted(dist.items())],
                                   provenance=piece, action=a, candidates=tag,
                                   outcomes=tuple(outcomes))
            if len(mdp.states) > max_states:
                raise MemoryGuardExceeded(
                    f"abstraction exceeded {max_states} states at depth {t + 1}")
        log.debug("depth %d: %d frontier states, %d total", t + 1, len(nxt), len(mdp.states))
        frontier = nxt
    return mdp.freeze()


def _image(env, box, w, memo):
    # words of a fault model often share prefixes (a, aa); reuse them
    if not w:
        return box
    key = (box, w)
    if key not in memo:
        memo[key] = env.abstract_step(_image(env, box, w[:-1], memo), w[-1:])
    return memo[key]


def initial_grid(env: Environment, cell_widths, region: Box | None = None) -> list[Box]:
    """Tile the initial region with cells of the given widths; the last cell
    in each dimension is truncated to fit."""
    region = region or env.init_region
    if len(cell_widths) != region.n:
        raise BadPrecision(f"need {region.n} cell widths, got {len(cell_widths)}")
    edges = []
    for lo, hi, w in zip(region.lo, region.hi, cell_widths):
        if not w > 0:
            raise BadPrecision(f"cell width must be positive, got {w}")
        count = max(1, math.ceil((hi - lo) / w * (1 - 1e-12)))
        cuts = [lo + i * w for i in range(count)] + [hi]
        edges.append(list(zip(cuts[:-1], cuts[1:])))
    cells = [[]]
    for dim_edges in edges:
        cells = [c + [e] for c in cells for e in dim_edges]
    return [Box.from_pairs(c) for c in cells]
