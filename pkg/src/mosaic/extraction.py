"""Branch-and-bound search for the subregions of a box on which the policy
always, or never, picks a given action."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadActionIndex, BadPrecision, CannotSplit, DimMismatch
from .geometry import Box, box_split, box_subset, box_volume, interiors_overlap
from .network import (BOUND_METHODS, Network, add_action_layer, interval_bounds_batch,
                      planet_bounds_batch)
from .spatial_index import RStarTree

SAT, UNSAT, UNDECIDED = "sat", "unsat", "undecided"


@dataclass
class ActionPartition:
    action: int
    epsilon: tuple[float, ...]
    sat: list[Box] = field(default_factory=list)
    unsat: list[Box] = field(default_factory=list)
    undecided: list[Box] = field(default_factory=list)

    def labelled(self) -> list[tuple[Box, str]]:
        return ([(b, SAT) for b in self.sat] + [(b, UNSAT) for b in self.unsat]
                + [(b, UNDECIDED) for b in self.undecided])


def _eps_vector(eps, n) -> tuple[float, ...]:
    if np.ndim(eps) == 0:
        eps = [float(eps)] * n
    eps = tuple(float(e) for e in eps)
    if len(eps) != n:
        raise DimMismatch(f"precision has {len(eps)} entries, box has {n} dimensions")
    if not all(e > 0 for e in eps):
        raise BadPrecision(f"precision must be positive, got {eps}")
    return eps


def default_eps(init_region: Box, divisions: int = 64) -> tuple[float, ...]:
    """Per-dimension precision: a fixed fraction of the initial region's widths."""
    return tuple(w / divisions for w in init_region.widths)


def _below_eps(b: Box, eps) -> bool:
    return all(w < e for w, e in zip(b.widths, eps))


class PolicyExtractor:
    """Runs the per-action branch and bound for one network at one precision.

    ``eps`` may be a scalar or a per-dimension vector; a box is too small to
    split once every width is below the matching entry. Splits halve the
    widest dimension relative to ``eps``.

    With ``cache=True`` every decided box is stored in a per-action R*-tree;
    later searches classify a sub-box immediately when a stored box of the
    same verdict contains it.
    """

    def __init__(self, net: Network, eps, bound_method: str = "planet",
                 cache: bool = False, merge: bool = True):
        if net.output_dim < 2:
            raise BadActionIndex("policy network needs at least two actions")
        if bound_method not in BOUND_METHODS:
            raise ValueError(f"unknown bound method {bound_method!r}")
        self.net = net
        self.n = net.input_dim
        self.eps = _eps_vector(eps, self.n)
        self.bound_method = bound_method
        self.merge = merge
        self._action_nets: dict[int, Network] = {}
        self._cache = {a: RStarTree(self.n) for a in range(net.output_dim)} if cache else None
        self.stats = {"bound_calls": 0, "boxes_bounded": 0, "cache_hits": 0}

    def action_net(self, a: int) -> Network:
        if not 0 <= a < self.net.output_dim:
            raise BadActionIndex(f"action {a} outside [0, {self.net.output_dim})")
        if a not in self._action_nets:
            self._action_nets[a] = add_action_layer(self.net, a)
        return self._action_nets[a]

    def _bounds(self, mod_net, boxes):
        lo = np.array([b.lo for b in boxes])
        hi = np.array([b.hi for b in boxes])
        self.stats["bound_calls"] += 1
        self.stats["boxes_bounded"] += len(boxes)
        lb, ub = interval_bounds_batch(mod_net, lo, hi)
        lb, ub = lb[:, 0], ub[:, 0]
        if self.bound_method == "planet":
            open_ = ~((ub < 0) | (lb > 0))
            if open_.any():
                plb, pub = planet_bounds_batch(mod_net, lo[open_], hi[open_])
                lb[open_] = np.maximum(lb[open_], plb[:, 0])
                ub[open_] = np.minimum(ub[open_], pub[:, 0])
        return lb, ub

    def _cached(self, a, box):
        if self._cache is None:
            return None
        for r in self._cache[a].window_query(box):
            if box_subset(box, r.box):
                self.stats["cache_hits"] += 1
                return r.payload
        return None

    def find_action_subregions(self, a: int, b: Box) -> ActionPartition:
        return self.find_action_subregions_many(a, [b])[0]

    def find_action_subregions_many(self, a: int, boxes: Sequence[Box]) -> list[ActionPartition]:
        """Independent searches on several boxes, bounded together in batches."""
        for b in boxes:
            if b.n != self.n:
                raise DimMismatch(f"box dimension {b.n} != network input {self.n}")
        mod_net = self.action_net(a)
        parts = [ActionPartition(a, self.eps) for _ in boxes]
        fresh = []
        queue = list(enumerate(boxes))
        while queue:
            pending = []
            for origin, box in queue:
                hit = self._cached(a, box)
                if hit is not None:
                    _bucket(parts[origin], hit).append(box)
                else:
                    pending.append((origin, box))
            nxt = []
            if pending:
                lb, ub = self._bounds(mod_net, [box for _, box in pending])
                for (origin, box), l, u in zip(pending, lb, ub):
                    part = parts[origin]
                    if u < 0:
                        part.sat.append(box)
                        fresh.append((box, SAT))
                    elif l > 0:
                        part.unsat.append(box)
                        fresh.append((box, UNSAT))
                    elif _below_eps(box, self.eps):
                        part.undecided.append(box)
                    else:
                        try:
                            nxt.extend((origin, c) for c in box_split(box, self.eps))
                        except CannotSplit:
                            # eps below float spacing
                            part.undecided.append(box)
            queue = nxt
        if self._cache is not None:
            for box, verdict in fresh:
                self._cache[a].insert(box, verdict)
        return parts

    def partition_consistent(self, b: Box) -> list[tuple[Box, tuple[int, ...]]]:
        """Interior-disjoint boxes covering ``b``, each tagged with the actions
        the policy may take there (a single action wherever it is decided)."""
        return self.partition_consistent_many([b])[0]

    def partition_consistent_many(self, boxes: Sequence[Box]):
        m = self.net.output_dim
        per_action = [self.find_action_subregions_many(a, boxes) for a in range(m)]
        result = []
        for i, b in enumerate(boxes):
            pieces = [(b, {})]
            for a in range(m):
                pieces = _overlay(pieces, per_action[a][i].labelled(), a)
            tagged = []
            for box, status in pieces:
                sat = [a for a in range(m) if status[a] == SAT]
                if sat:
                    tag = (sat[0],)
                else:
                    tag = tuple(a for a in range(m) if status[a] != UNSAT) or tuple(range(m))
                tagged.append((box, tag))
            if self.merge:
                tagged = merge_adjacent(tagged)
            tagged.sort(key=lambda e: (e[0].lo, e[0].hi))
            result.append(tagged)
        return result


def _bucket(part: ActionPartition, verdict: str) -> list:
    return {SAT: part.sat, UNSAT: part.unsat, UNDECIDED: part.undecided}[verdict]


def _overlay(pieces, leaves, a):
    if not pieces or not leaves:
        return []
    plo = np.array([b.lo for b, _ in pieces])[:, None, :]
    phi = np.array([b.hi for b, _ in pieces])[:, None, :]
    llo = np.array([b.lo for b, _ in leaves])[None, :, :]
    lhi = np.array([b.hi for b, _ in leaves])[None, :, :]
    # positive-measure overlap along the piece's non-degenerate dimensions,
    # closed intersection along its degenerate ones
    flat = plo == phi
    ok = np.where(flat, (llo <= plo) & (plo <= lhi), (plo < lhi) & (llo < phi)).all(axis=2)
    lo = np.maximum(plo, llo)
    hi = np.minimum(phi, lhi)
    out = []
    for i, j in zip(*np.nonzero(ok)):
        out.append((Box(lo[i, j], hi[i, j]), {**pieces[i][1], a: leaves[j][1]}))
    return out


def merge_adjacent(tagged):
    """Repeatedly fuse pairs of equally tagged boxes whose union is a box."""
    items = list(tagged)
    changed = True
    while changed:
        changed = False
        items.sort(key=lambda e: (e[1], e[0].lo, e[0].hi))
        i = 0
        while i < len(items):
            b1, t1 = items[i]
            j = i + 1
            while j < len(items) and items[j][1] == t1:
                fused = _fuse(b1, items[j][0])
                if fused is not None:
                    items[i] = (fused, t1)
                    b1 = fused
                    del items[j]
                    changed = True
                else:
                    j += 1
            i += 1
    return items


def _fuse(a: Box, b: Box) -> Box | None:
    diff = [d for d in range(a.n) if a.lo[d] != b.lo[d] or a.hi[d] != b.hi[d]]
    if len(diff) != 1:
        return None
    d = diff[0]
    if a.hi[d] == b.lo[d] or b.hi[d] == a.lo[d]:
        lo, hi = list(a.lo), list(a.hi)
        lo[d], hi[d] = min(a.lo[d], b.lo[d]), max(a.hi[d], b.hi[d])
        return Box(lo, hi)
    return None


def find_action_subregions(net: Network, a: int, b: Box, eps,
                           bound_method: str = "planet") -> ActionPartition:
    return PolicyExtractor(net, eps, bound_method, cache=False).find_action_subregions(a, b)


def partition_consistent(net: Network, b: Box, eps, bound_method: str = "planet",
                         merge: bool = True) -> list[tuple[Box, tuple[int, ...]]]:
    return PolicyExtractor(net, eps, bound_method, cache=False,
                           merge=merge).partition_consistent(b)


def partition_volume(parts: Sequence[Box]) -> float:
    return sum(box_volume(b) for b in parts)
