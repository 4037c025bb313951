"""Controller fault models: each intended action maps to a finite
distribution over the action sequences actually executed."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import BadActionIndex, BadProbability, ConfigError

Word = tuple[int, ...]

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FaultModel:
    """``table[a]`` is the merged support of ``f(a)`` as ``(prob, word)`` pairs,
    sorted lexicographically by word."""

    table: tuple[tuple[tuple[float, Word], ...], ...]
    kind: str = "custom"

    @classmethod
    def from_table(cls, table: Mapping[int, Sequence[tuple[float, Sequence[int]]]],
                   n_actions: int | None = None, kind: str = "custom") -> "FaultModel":
        if n_actions is None:
            n_actions = max(table) + 1 if table else 0
        rows = []
        for a in range(n_actions):
            if a not in table:
                raise BadProbability(f"fault model has no distribution for action {a}")
            merged: dict[Word, float] = defaultdict(float)
            for p, word in table[a]:
                p = float(p)
                if not 0.0 < p <= 1.0 or math.isnan(p):
                    raise BadProbability(f"probability {p} outside (0, 1]")
                word = tuple(int(x) for x in word)
                for x in word:
                    if not 0 <= x < n_actions:
                        raise BadActionIndex(f"word {word} uses unknown action {x}")
                merged[word] += p
            total = math.fsum(merged.values())
            if abs(total - 1.0) > _SUM_TOL:
                raise BadProbability(f"distribution for action {a} sums to {total}")
            rows.append(tuple((merged[w], w) for w in sorted(merged)))
        return cls(tuple(rows), kind)

    @property
    def n_actions(self) -> int:
        return len(self.table)

    def outcomes(self, a: int) -> tuple[tuple[float, Word], ...]:
        return outcomes(self, a)


def outcomes(f: FaultModel, a: int) -> tuple[tuple[float, Word], ...]:
    if not 0 <= a < f.n_actions:
        raise BadActionIndex(f"action {a} outside [0, {f.n_actions})")
    return f.table[a]


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise BadProbability(f"fault probability must lie in (0, 1), got {p}")


def sticky(p: float, actions: Sequence | int) -> FaultModel:
    """Each action is executed twice with probability ``p``."""
    _check_p(p)
    n = actions if isinstance(actions, int) else len(actions)
    return FaultModel.from_table({a: [(p, (a, a)), (1.0 - p, (a,))] for a in range(n)}, n, "sticky")


def dropped(p: float, actions: Sequence | int) -> FaultModel:
    """Each action fails to execute with probability ``p``."""
    _check_p(p)
    n = actions if isinstance(actions, int) else len(actions)
    return FaultModel.from_table({a: [(p, ()), (1.0 - p, (a,))] for a in range(n)}, n, "dropped")


def fault_free(actions: Sequence | int) -> FaultModel:
    n = actions if isinstance(actions, int) else len(actions)
    return FaultModel.from_table({a: [(1.0, (a,))] for a in range(n)}, n, "none")


def fault_model_from_config(cfg: Mapping, n_actions: int) -> FaultModel:
    """Build from ``{"kind": "sticky"|"dropped"|"none"|"custom", ...}``.

    Custom tables map action indices (as strings or ints) to lists of
    ``{"prob": p, "word": [a, ...]}``.
    """
    kind = cfg.get("kind", "sticky")
    if kind == "sticky":
        return sticky(float(cfg["p"]), n_actions)
    if kind == "dropped":
        return dropped(float(cfg["p"]), n_actions)
    if kind == "none":
        return fault_free(n_actions)
    if kind == "custom":
        table = {int(a): [(e["prob"], e["word"]) for e in entries]
                 for a, entries in cfg["table"].items()}
        return FaultModel.from_table(table, n_actions)
    raise ConfigError(f"unknown fault model kind {kind!r}")
