"""Finite MDP over abstract (box) states with integer-indexed choices.

States are keyed by ``(box, depth)``; the same box at two depths gives two
states, so a model built to horizon ``k`` is a layered DAG. Fail states are
absorbing and carry no choices.

Explicit-state export writes PRISM-style ``.tra`` / ``.lab`` / ``.sta`` files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BadDistribution, ChoiceOnFailState, MosaicError, ParseError
from .geometry import Box

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class State:
    box: Box | None
    fail: bool
    depth: int


@dataclass(frozen=True)
class Choice:
    """One probabilistic choice.

    ``distribution`` holds ``(prob, successor)`` pairs; ``outcomes`` keeps the
    unmerged ``(prob, word, successor)`` triples. ``provenance`` is the
    subregion of the source box the choice stands for, ``action`` the
    controller action it assumes and ``candidates`` the action set the
    subregion was tagged with.
    """

    distribution: tuple[tuple[float, int], ...]
    provenance: Box | None = None
    action: int | None = None
    candidates: tuple[int, ...] = ()
    outcomes: tuple[tuple[float, tuple[int, ...], int], ...] = ()


@dataclass
class AbstractMdp:
    states: list[State] = field(default_factory=list)
    initial: list[int] = field(default_factory=list)
    choices: list[list[Choice]] = field(default_factory=list)
    frozen: bool = False
    _index: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def n_choices(self) -> int:
        return sum(len(c) for c in self.choices)

    @property
    def n_transitions(self) -> int:
        return sum(len(ch.distribution) for cs in self.choices for ch in cs)

    @property
    def max_depth(self) -> int:
        return max((s.depth for s in self.states), default=0)

    def _check_open(self):
        if self.frozen:
            raise MosaicError("model is frozen")

    def add_state(self, box: Box | None, fail: bool, depth: int) -> int:
        """Insert a state, or return the id of the existing ``(box, depth)`` state."""
        sid, _ = self.add_state_ex(box, fail, depth)
        return sid

    def add_state_ex(self, box, fail, depth) -> tuple[int, bool]:
        key = (box, depth) if box is not None else None
        if key is not None and key in self._index:
            return self._index[key], False
        self._check_open()
        sid = len(self.states)
        self.states.append(State(box, bool(fail), int(depth)))
        self.choices.append([])
        if key is not None:
            self._index[key] = sid
        return sid, True

    def mark_initial(self, sid: int) -> None:
        if sid not in self.initial:
            self.initial.append(sid)

    def add_choice(self, sid: int, distribution: Iterable[tuple[float, int]], **info) -> int:
        self._check_open()
        if self.states[sid].fail:
            raise ChoiceOnFailState(f"state {sid} is a fail state")
        dist = tuple((float(p), int(t)) for p, t in distribution)
        for p, t in dist:
            if not 0.0 < p <= 1.0:
                raise BadDistribution(f"probability {p} outside (0, 1]")
            if not 0 <= t < len(self.states):
                raise BadDistribution(f"unknown successor {t}")
        total = math.fsum(p for p, _ in dist)
        if abs(total - 1.0) > _SUM_TOL:
            raise BadDistribution(f"distribution sums to {total}")
        self.choices[sid].append(Choice(dist, **info))
        return len(self.choices[sid]) - 1

    def freeze(self) -> "AbstractMdp":
        self.frozen = True
        return self

    def find(self, box: Box, depth: int) -> int | None:
        return self._index.get((box, depth))


def add_state(mdp: AbstractMdp, box, fail, depth) -> int:
    return mdp.add_state(box, fail, depth)


def add_choice(mdp: AbstractMdp, sid: int, distribution, **info) -> int:
    return mdp.add_choice(sid, distribution, **info)


# -- explicit-state files --------------------------------------------------

def _fmt(p: float) -> str:
    return format(p, ".17g")


def _paths(path):
    path = Path(path)
    stem = path.with_suffix("")
    return stem.with_suffix(".tra"), stem.with_suffix(".lab"), stem.with_suffix(".sta")


def export_model(mdp: AbstractMdp, path) -> tuple[Path, Path, Path]:
    """Write ``<stem>.tra``, ``<stem>.lab`` and ``<stem>.sta``.

    ``.tra``: header ``states choices transitions`` then ``src choice dst prob``
    lines. States without choices (fail and horizon states) get a single
    probability-one self-loop so external checkers see no deadlocks; a
    self-loop cannot change a bounded reachability value.
    ``.lab``: ``0="init" 1="fail"`` then ``state: labels``.
    ``.sta``: ``(depth,lo_0,hi_0,...)`` then ``state:(...)`` rows.
    """
    tra, lab, sta = _paths(path)
    lines = []
    n_choices = 0
    for sid, cs in enumerate(mdp.choices):
        if not cs:
            lines.append(f"{sid} 0 {sid} 1")
            n_choices += 1
            continue
        for j, ch in enumerate(cs):
            for p, t in sorted(ch.distribution, key=lambda e: e[1]):
                lines.append(f"{sid} {j} {t} {_fmt(p)}")
        n_choices += len(cs)
    tra.write_text(f"{len(mdp.states)} {n_choices} {len(lines)}\n" + "\n".join(lines) + "\n")

    init = set(mdp.initial)
    rows = ['0="init" 1="fail"']
    for sid, st in enumerate(mdp.states):
        labels = [str(i) for i, on in ((0, sid in init), (1, st.fail)) if on]
        if labels:
            rows.append(f"{sid}: {' '.join(labels)}")
    lab.write_text("\n".join(rows) + "\n")

    dim = next((s.box.n for s in mdp.states if s.box is not None), 0)
    head = ["depth"] + [f"{kind}_{d}" for d in range(dim) for kind in ("lo", "hi")]
    rows = ["(" + ",".join(head) + ")"]
    for sid, st in enumerate(mdp.states):
        vals = [str(st.depth)]
        if st.box is not None:
            for a, b in zip(st.box.lo, st.box.hi):
                vals += [_fmt(a), _fmt(b)]
        rows.append(f"{sid}:(" + ",".join(vals) + ")")
    sta.write_text("\n".join(rows) + "\n")
    return tra, lab, sta


def import_model(path) -> AbstractMdp:
    """Read files written by :func:`export_model` back into an :class:`AbstractMdp`.

    Single-choice probability-one self-loops are read as "no choices".
    Without a ``.sta`` file, depths are recovered by breadth-first search
    from the initial states and boxes are left empty.
    """
    tra, lab, sta = _paths(path)
    try:
        lines = tra.read_text().split("\n")
        n_states, _, _ = (int(x) for x in lines[0].split())
        raw: dict[int, dict[int, list]] = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            s, j, t, p = line.split()
            raw.setdefault(int(s), {}).setdefault(int(j), []).append((float(p), int(t)))
        init, fail = set(), set()
        for line in lab.read_text().split("\n")[1:]:
            if not line.strip():
                continue
            sid, labels = line.split(":")
            for lbl in labels.split():
                (init if lbl == "0" else fail).add(int(sid))
        boxes, depths = [None] * n_states, [None] * n_states
        if sta.exists():
            for line in sta.read_text().split("\n")[1:]:
                if not line.strip():
                    continue
                sid, vals = line.split(":", 1)
                vals = vals.strip()[1:-1].split(",")
                depths[int(sid)] = int(vals[0])
                nums = [float(v) for v in vals[1:]]
                if nums:
                    boxes[int(sid)] = Box(nums[0::2], nums[1::2])
    except (ValueError, IndexError, OSError) as exc:
        raise ParseError(f"cannot read model {path}: {exc}") from exc

    def is_self_loop(sid, cs):
        return len(cs) == 1 and cs.get(0) == [(1.0, sid)]

    if any(d is None for d in depths):
        depths = _bfs_depths(n_states, sorted(init), raw)
    mdp = AbstractMdp()
    for sid in range(n_states):
        mdp.states.append(State(boxes[sid], sid in fail, depths[sid]))
        mdp.choices.append([])
        if boxes[sid] is not None:
            mdp._index[(boxes[sid], depths[sid])] = sid
    mdp.initial = sorted(init)
    for sid in range(n_states):
        cs = raw.get(sid, {})
        if is_self_loop(sid, cs):
            continue
        for j in sorted(cs):
            mdp.add_choice(sid, cs[j])
    return mdp


def _bfs_depths(n, init, raw):
    depths: list = [None] * n
    frontier = list(init)
    for s in frontier:
        depths[s] = 0
    while frontier:
        nxt = []
        for s in frontier:
            for dist in raw.get(s, {}).values():
                for _, t in dist:
                    if depths[t] is None:
                        depths[t] = depths[s] + 1
                        nxt.append(t)
        frontier = nxt
    return [0 if d is None else d for d in depths]


def isomorphic(a: AbstractMdp, b: AbstractMdp, tol: float = 0.0) -> bool:
    """Structural equality under the identity state map (both models are
    contiguously numbered in insertion order)."""
    if len(a.states) != len(b.states) or sorted(a.initial) != sorted(b.initial):
        return False
    for sa, sb in zip(a.states, b.states):
        if sa.fail != sb.fail or sa.depth != sb.depth:
            return False
    for ca, cb in zip(a.choices, b.choices):
        if len(ca) != len(cb):
            return False
        for x, y in zip(ca, cb):
            dx, dy = sorted(x.distribution, key=lambda e: e[1]), sorted(y.distribution, key=lambda e: e[1])
            if len(dx) != len(dy):
                return False
            for (p, s), (q, t) in zip(dx, dy):
                if s != t or abs(p - q) > tol:
                    return False
    return True


def states_at_depth(mdp: AbstractMdp, depth: int) -> Sequence[int]:
    return [i for i, s in enumerate(mdp.states) if s.depth == depth]
