"""R*-tree over n-dimensional boxes.

Follows Beckmann et al.: overlap-minimising subtree choice at the leaf
level, margin-driven split axis selection, and forced reinsertion of the
entries farthest from the node centre on the first overflow per level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterator

from .errors import DimMismatch
from .geometry import Box, box_subtract

__all__ = ["IndexedRegion", "RStarTree", "index_insert", "window_query", "coverage_gaps"]


@dataclass(frozen=True)
class IndexedRegion:
    id: int
    box: Box
    payload: Any = None


class _Item:
    __slots__ = ("lo", "hi", "region")

    def __init__(self, region: IndexedRegion):
        self.lo = region.box.lo
        self.hi = region.box.hi
        self.region = region


class _Node:
    __slots__ = ("level", "entries", "lo", "hi", "parent")

    def __init__(self, level, entries=None):
        self.level = level
        self.entries = entries if entries is not None else []
        self.parent = None
        self.lo = None
        self.hi = None

    def refit(self):
        es = self.entries
        if not es:
            self.lo = self.hi = None
            return
        n = len(es[0].lo)
        self.lo = tuple(min(e.lo[d] for e in es) for d in range(n))
        self.hi = tuple(max(e.hi[d] for e in es) for d in range(n))


def _area(lo, hi):
    return math.prod(h - l for l, h in zip(lo, hi))


def _margin(lo, hi):
    return sum(h - l for l, h in zip(lo, hi))


def _union(alo, ahi, blo, bhi):
    return (tuple(map(min, alo, blo)), tuple(map(max, ahi, bhi)))


def _overlap(alo, ahi, blo, bhi):
    v = 1.0
    for al, ah, bl, bh in zip(alo, ahi, blo, bhi):
        w = min(ah, bh) - max(al, bl)
        if w <= 0:
            return 0.0
        v *= w
    return v


def _mbr(entries):
    n = len(entries[0].lo)
    return (tuple(min(e.lo[d] for e in entries) for d in range(n)),
            tuple(max(e.hi[d] for e in entries) for d in range(n)))


def _hits(lo, hi, wlo, whi):
    for a, b, c, d in zip(lo, hi, wlo, whi):
        if a > d or c > b:
            return False
    return True


class RStarTree:
    """Dynamic R*-tree storing :class:`IndexedRegion` values.

    Queries use closed-box semantics: touching boxes intersect.
    """

    def __init__(self, dim: int, max_entries: int = 8, min_fill: float = 0.4,
                 reinsert_fraction: float = 0.3):
        if dim < 1:
            raise DimMismatch("index dimension must be positive")
        self.dim = dim
        self.max_entries = max_entries
        self.min_entries = max(1, int(math.floor(min_fill * max_entries)))
        self.reinsert_count = max(1, int(round(reinsert_fraction * max_entries)))
        self.root = _Node(0)
        self._next_id = 0
        self._size = 0
        self._reinserted_levels: set[int] = set()
        self.node_visits = 0

    def __len__(self):
        return self._size

    def __iter__(self) -> Iterator[IndexedRegion]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.level == 0:
                for e in node.entries:
                    yield e.region
            else:
                stack.extend(node.entries)

    def _check(self, box: Box):
        if box.n != self.dim:
            raise DimMismatch(f"box dimension {box.n} != index dimension {self.dim}")

    # -- insertion -------------------------------------------------------

    def insert(self, box: Box, payload: Any = None) -> int:
        self._check(box)
        region = IndexedRegion(self._next_id, box, payload)
        self._next_id += 1
        self._size += 1
        self._reinserted_levels = set()
        self._insert(_Item(region), 0)
        return region.id

    def _insert(self, entry, level):
        node = self._choose_subtree(entry, level)
        node.entries.append(entry)
        if level > 0:
            entry.parent = node
        self._extend_upward(node, entry.lo, entry.hi)
        if len(node.entries) > self.max_entries:
            self._overflow(node)

    def _extend_upward(self, node, lo, hi):
        while node is not None:
            if node.lo is None:
                node.lo, node.hi = lo, hi
            else:
                nlo, nhi = _union(node.lo, node.hi, lo, hi)
                if nlo == node.lo and nhi == node.hi:
                    break
                node.lo, node.hi = nlo, nhi
            node = node.parent

    def _choose_subtree(self, entry, level):
        node = self.root
        elo, ehi = entry.lo, entry.hi
        while node.level > level:
            children = node.entries
            if node.level == 1:
                best, best_key = None, None
                for c in children:
                    ulo, uhi = _union(c.lo, c.hi, elo, ehi)
                    before = after = 0.0
                    for o in children:
                        if o is c:
                            continue
                        before += _overlap(c.lo, c.hi, o.lo, o.hi)
                        after += _overlap(ulo, uhi, o.lo, o.hi)
                    area = _area(c.lo, c.hi)
                    key = (after - before, _area(ulo, uhi) - area, area)
                    if best_key is None or key < best_key:
                        best, best_key = c, key
            else:
                best, best_key = None, None
                for c in children:
                    ulo, uhi = _union(c.lo, c.hi, elo, ehi)
                    area = _area(c.lo, c.hi)
                    key = (_area(ulo, uhi) - area, area, _margin(ulo, uhi))
                    if best_key is None or key < best_key:
                        best, best_key = c, key
            node = best
        return node

    def _overflow(self, node):
        if node is not self.root and node.level not in self._reinserted_levels:
            self._reinserted_levels.add(node.level)
            self._reinsert(node)
        else:
            self._split(node)

    def _reinsert(self, node):
        clo, chi = node.lo, node.hi
        centre = [0.5 * (a + b) for a, b in zip(clo, chi)]

        def dist(e):
            return sum((0.5 * (a + b) - c) ** 2 for a, b, c in zip(e.lo, e.hi, centre))

        ranked = sorted(node.entries, key=dist, reverse=True)
        removed = ranked[: self.reinsert_count]
        node.entries = ranked[self.reinsert_count:]
        self._refit_upward(node)
        for e in reversed(removed):  # close reinsert: nearest first
            self._insert(e, node.level)

    def _refit_upward(self, node):
        while node is not None:
            node.refit()
            node = node.parent

    def _split(self, node):
        g1, g2 = self._choose_split(node.entries)
        node.entries = g1
        sibling = _Node(node.level, g2)
        if node.level > 0:
            for e in g2:
                e.parent = sibling
        node.refit()
        sibling.refit()
        if node is self.root:
            root = _Node(node.level + 1, [node, sibling])
            node.parent = sibling.parent = root
            root.refit()
            self.root = root
            return
        parent = node.parent
        parent.entries.append(sibling)
        sibling.parent = parent
        self._refit_upward(parent)
        if len(parent.entries) > self.max_entries:
            self._overflow(parent)

    def _choose_split(self, entries):
        m, total = self.min_entries, len(entries)
        best_axis, best_margin, best_sorts = None, None, None
        for d in range(self.dim):
            sorts = (sorted(entries, key=lambda e: (e.lo[d], e.hi[d])),
                     sorted(entries, key=lambda e: (e.hi[d], e.lo[d])))
            margin = 0.0
            for s in sorts:
                for k in range(m, total - m + 1):
                    alo, ahi = _mbr(s[:k])
                    blo, bhi = _mbr(s[k:])
                    margin += _margin(alo, ahi) + _margin(blo, bhi)
            if best_margin is None or margin < best_margin:
                best_axis, best_margin, best_sorts = d, margin, sorts
        best, best_key = None, None
        for s in best_sorts:
            for k in range(m, total - m + 1):
                alo, ahi = _mbr(s[:k])
                blo, bhi = _mbr(s[k:])
                key = (_overlap(alo, ahi, blo, bhi), _area(alo, ahi) + _area(blo, bhi))
                if best_key is None or key < best_key:
                    best, best_key = (list(s[:k]), list(s[k:])), key
        return best

    # -- queries -----------------------------------------------------------

    def window_query(self, window: Box) -> list[IndexedRegion]:
        """All stored regions whose boxes intersect ``window``, in id order."""
        self._check(window)
        if self.root.lo is None:
            return []
        wlo, whi = window.lo, window.hi
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            self.node_visits += 1
            if node.level == 0:
                for e in node.entries:
                    if _hits(e.lo, e.hi, wlo, whi):
                        out.append(e.region)
            else:
                for c in node.entries:
                    if _hits(c.lo, c.hi, wlo, whi):
                        stack.append(c)
        out.sort(key=lambda r: r.id)
        return out

    def find_exact(self, box: Box) -> list[IndexedRegion]:
        """Stored regions whose box is bitwise equal to ``box``."""
        return [r for r in self.window_query(box) if r.box == box]

    def coverage_gaps(self, window: Box, regions=None) -> list[Box]:
        """Interior-disjoint boxes tiling ``window`` minus the stored boxes.

        ``regions`` restricts the subtraction to a pre-filtered candidate list.
        """
        self._check(window)
        if regions is None:
            regions = self.window_query(window)
        gaps = [window]
        for r in regions:
            nxt = []
            for g in gaps:
                nxt.extend(box_subtract(g, r.box))
            gaps = nxt
            if not gaps:
                break
        return gaps

    def depth(self) -> int:
        return self.root.level + 1


def index_insert(idx: RStarTree, region: IndexedRegion | Box, payload: Any = None) -> int:
    """Store a region; its ``id`` field is ignored and a fresh id returned."""
    if isinstance(region, IndexedRegion):
        return idx.insert(region.box, region.payload)
    return idx.insert(region, payload)


def coverage_gaps(idx: RStarTree, window: Box) -> list[Box]:
    return idx.coverage_gaps(window)


def window_query(idx: RStarTree, window: Box) -> list[IndexedRegion]:
    return idx.window_query(window)
