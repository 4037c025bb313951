"""Bounded reachability: maximum failure probability on the abstraction by
backward induction, and the exact failure probability of the concrete
process from a single start state by enumerating fault outcomes."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .environment import Environment
from .errors import MosaicError, NotLayered
from .faults import FaultModel
from .geometry import box_contains
from .mdp import AbstractMdp
from .network import Network, policy_action


def _check_layered(mdp: AbstractMdp):
    for sid, cs in enumerate(mdp.choices):
        d = mdp.states[sid].depth
        for ch in cs:
            for _, t in ch.distribution:
                if mdp.states[t].depth != d + 1:
                    raise NotLayered(f"transition {sid}->{t} goes from depth {d} to "
                                     f"{mdp.states[t].depth}")


def max_reach(mdp: AbstractMdp, k: int) -> dict[int, float]:
    """``Pr^max(<>^{<=k} fail)`` for every state of depth at most ``k``.

    A state at depth ``d`` has ``k - d`` steps left. Values come from a
    single sweep from the deepest layer up; no iteration to convergence.
    States deeper than ``k`` are outside the horizon and omitted.
    """
    if k < 0:
        raise ValueError("horizon must be non-negative")
    _check_layered(mdp)
    layers: dict[int, list[int]] = {}
    for sid, st in enumerate(mdp.states):
        if st.depth <= k:
            layers.setdefault(st.depth, []).append(sid)
    value: dict[int, float] = {}
    for d in sorted(layers, reverse=True):
        for sid in layers[d]:
            st = mdp.states[sid]
            if st.fail:
                value[sid] = 1.0
            elif d == k or not mdp.choices[sid]:
                value[sid] = 0.0
            else:
                value[sid] = max(math.fsum(p * value[t] for p, t in ch.distribution)
                                 for ch in mdp.choices[sid])
    return value


def policy_value(mdp: AbstractMdp, sid: int, k: int, choose) -> float:
    """Value of the history-free policy ``choose(sid) -> choice index``."""
    _check_layered(mdp)
    memo: dict[int, float] = {}

    def rec(s):
        if s in memo:
            return memo[s]
        st = mdp.states[s]
        if st.fail:
            v = 1.0
        elif st.depth >= k or not mdp.choices[s]:
            v = 0.0
        else:
            ch = mdp.choices[s][choose(s)]
            v = math.fsum(p * rec(t) for p, t in ch.distribution)
        memo[s] = v
        return v

    return rec(sid)


def tracking_policy_value(mdp: AbstractMdp, net: Network, env: Environment,
                          f: FaultModel, sid: int, s0: Sequence[float], k: int) -> float:
    """Value of ``sid`` when every abstract step follows a concrete state.

    At abstract state ``a`` holding concrete state ``s``, take the choice
    whose provenance contains ``s`` and whose action is ``pi(s)``; the fault
    word ``w`` then moves to the successor recorded for ``w`` and the concrete
    state to ``E(s, w)``. The result lies between the concrete failure
    probability of ``s0`` and ``max_reach`` of ``sid``.
    """

    def rec(a, s, depth):
        st = mdp.states[a]
        if st.fail:
            return 1.0
        if depth >= k:
            return 0.0
        act = policy_action(net, np.asarray(s))
        for ch in mdp.choices[a]:
            if ch.action == act and box_contains(ch.provenance, s):
                break
        else:
            raise MosaicError(f"no choice of state {a} covers {s} with action {act}")
        words = {w: t for _, w, t in ch.outcomes}
        return math.fsum(p * rec(words[w], env.step_word(s, w), depth + 1)
                         for p, w in f.outcomes(act))

    return rec(sid, tuple(float(x) for x in s0), mdp.states[sid].depth)


def concrete_reach_batch(net: Network, env: Environment, f: FaultModel,
                         starts, k: int) -> np.ndarray:
    """Exact ``Pr_s(<>^{<=k} fail)`` for each start state.

    Expands every fault outcome layer by layer (``|support|^k`` leaves per
    start), evaluating the policy once per layer on the whole batch.
    """
    if k < 0:
        raise ValueError("horizon must be non-negative")
    starts = [tuple(float(x) for x in s) for s in starts]
    # probabilities of the failing paths, summed once at the end
    hits: list[list[float]] = [[] for _ in starts]
    # frontier entries: (start index, probability, state)
    frontier = []
    for i, s in enumerate(starts):
        if env.is_fail(s):
            hits[i].append(1.0)
        else:
            frontier.append((i, 1.0, s))
    for _ in range(k):
        if not frontier:
            break
        acts = policy_action(net, np.array([s for _, _, s in frontier]).reshape(len(frontier), -1))
        nxt = []
        for (i, p, s), a in zip(frontier, np.atleast_1d(acts)):
            for q, w in f.outcomes(int(a)):
                s2 = env.step_word(s, w)
                if env.is_fail(s2):
                    hits[i].append(p * q)
                else:
                    nxt.append((i, p * q, s2))
        frontier = nxt
    # rounded path products can sum a hair past one
    return np.array([min(1.0, math.fsum(h)) for h in hits])


def concrete_reach(net: Network, env: Environment, f: FaultModel, s0, k: int) -> float:
    """Depth-first evaluation of the finite-horizon recursion from ``s0``."""
    s0 = tuple(float(x) for x in s0)

    def rec(s, left):
        if env.is_fail(s):
            return 1.0
        if left == 0:
            return 0.0
        a = policy_action(net, np.asarray(s))
        return min(1.0, math.fsum(p * rec(env.step_word(s, w), left - 1)
                                  for p, w in f.outcomes(a)))

    return rec(s0, k)
