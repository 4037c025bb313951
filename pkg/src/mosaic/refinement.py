"""Refinement of the initial regions: split every unsafe region, rebuild the
abstraction from each half and keep the tighter of the child and parent bounds."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from .abstraction import DEFAULT_MAX_STATES, build_mdp
from .environment import Environment
from .errors import BadProbability, CannotSplit
from .extraction import _eps_vector
from .faults import FaultModel
from .geometry import Box, box_split, box_volume
from .model_check import max_reach
from .network import Network

log = logging.getLogger(__name__)

SAFE, UNSAFE, PRECISION_LIMITED = "safe", "unsafe", "precision_limited"
VERDICTS = (SAFE, UNSAFE, PRECISION_LIMITED)


@dataclass(frozen=True)
class RegionResult:
    box: Box
    upper_bound: float
    verdict: str
    refinement_generation: int = 0

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if not 0.0 <= self.upper_bound <= 1.0:
            raise BadProbability(f"bound {self.upper_bound} outside [0, 1]")


def classify(box: Box, bound: float, p_safe: float, eps) -> str:
    """``safe`` iff ``bound < p_safe``; an unsafe box too small to split is
    ``precision_limited``."""
    if bound < p_safe:
        return SAFE
    eps = _eps_vector(eps, box.n)
    if all(w < e for w, e in zip(box.widths, eps)):
        return PRECISION_LIMITED
    return UNSAFE


def region_bound(net, env, f, box, k, eps, bound_method="planet",
                 max_states=DEFAULT_MAX_STATES, cache=False) -> float:
    """Upper bound for ``box`` from an abstraction built with it as sole initial state."""
    mdp = build_mdp(net, env, f, [box], k, eps, bound_method=bound_method,
                    max_states=max_states, cache=cache)
    return max_reach(mdp, k)[mdp.initial[0]]


def _bound_task(args):
    return region_bound(*args)


def initial_results(mdp, values, p_safe, eps) -> list[RegionResult]:
    """Generation-0 results, one per initial state of an already solved model."""
    out = []
    for sid in mdp.initial:
        box, ub = mdp.states[sid].box, values[sid]
        out.append(RegionResult(box, ub, classify(box, ub, p_safe, eps), 0))
    return out


def refine_iter(net: Network, env: Environment, f: FaultModel,
                results: Sequence[RegionResult], k: int, eps, p_safe: float,
                max_rounds: int = 50, *, refine_eps=None, bound_method: str = "planet",
                max_states: int = DEFAULT_MAX_STATES, cache: bool = False,
                max_splits_per_round: int | None = None,
                workers: int = 1) -> Iterator[list[RegionResult]]:
    """Yield the region list after every executed round.

    ``eps`` is the extraction precision passed to each rebuild; ``refine_eps``
    (default ``eps``) is the width below which a region is no longer split.
    Unsafe regions are split largest volume first; with
    ``max_splits_per_round`` only that many are split per round.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    refine_eps = _eps_vector(eps if refine_eps is None else refine_eps, env.state_dim)
    results = list(results)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for rnd in range(max_rounds):
            unsafe = [i for i, r in enumerate(results) if r.verdict == UNSAFE]
            if not unsafe:
                break
            unsafe.sort(key=lambda i: (-box_volume(results[i].box), results[i].box.lo))
            if max_splits_per_round is not None:
                unsafe = unsafe[:max_splits_per_round]
            children = {}
            for i in list(unsafe):
                try:
                    children[i] = box_split(results[i].box, refine_eps)
                except CannotSplit:
                    r = results[i]
                    results[i] = RegionResult(r.box, r.upper_bound, PRECISION_LIMITED,
                                              r.refinement_generation)
                    unsafe.remove(i)
            if not unsafe:
                # only verdicts changed
                yield list(results)
                break
            tasks = [(net, env, f, c, k, eps, bound_method, max_states, cache)
                     for i in unsafe for c in children[i]]
            bounds = list(pool.map(_bound_task, tasks)) if pool else [_bound_task(t) for t in tasks]
            it = iter(bounds)
            new = {}
            for i in unsafe:
                parent = results[i]
                new[i] = []
                for c in children[i]:
                    ub = min(next(it), parent.upper_bound)
                    new[i].append(RegionResult(c, ub, classify(c, ub, p_safe, refine_eps),
                                               parent.refinement_generation + 1))
            results = [r for i, r in enumerate(results) for r in (new[i] if i in new else [r])]
            log.info("refinement round %d: split %d regions, %d regions total",
                     rnd + 1, len(unsafe), len(results))
            yield results
    finally:
        if pool:
            pool.shutdown()


def refine(net: Network, env: Environment, f: FaultModel, results: Sequence[RegionResult],
           k: int, eps, p_safe: float, max_rounds: int = 50, **kw) -> list[RegionResult]:
    """Run up to ``max_rounds`` rounds; stops early once no region is unsafe."""
    out = list(results)
    for out in refine_iter(net, env, f, results, k, eps, p_safe, max_rounds, **kw):
        pass
    return out
