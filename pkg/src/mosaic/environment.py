"""Deterministic benchmark dynamics and their interval abstractions.

Each environment writes its one-step update once, against a small ``ops``
namespace. Running it with float ops gives the concrete map ``E(s, a)``;
running it with interval ops gives a box ``E^(b, a)`` that contains
``E(s, a)`` for every ``s`` in ``b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Sequence

from .errors import BadActionIndex, ConfigError, DimMismatch
from .geometry import (Box, Interval, interval_clamp, interval_cos, interval_sin,
                       interval_sqr)

ALL_SAFE = "all_safe"
INTERSECTS_FAIL = "intersects_fail"


class _FloatOps:
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)

    @staticmethod
    def sqr(x):
        return x * x

    @staticmethod
    def clip(x, lo, hi):
        return min(max(x, lo), hi)


class _IntervalOps:
    sin = staticmethod(interval_sin)
    cos = staticmethod(interval_cos)
    sqr = staticmethod(interval_sqr)
    clip = staticmethod(interval_clamp)


FLOAT_OPS = _FloatOps()
INTERVAL_OPS = _IntervalOps()


@dataclass(frozen=True)
class Environment:
    """Base class. Subclasses set ``name``, ``state_labels``, ``actions`` and
    implement ``update`` and the failure predicate."""

    name = "environment"
    state_labels: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()
    init_region: Box | None = None

    @property
    def state_dim(self) -> int:
        return len(self.state_labels)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def update(self, s: list, a: int, ops) -> list:
        raise NotImplementedError

    def fail_bounds(self) -> Sequence[tuple[int, float]]:
        """``(dim, threshold)`` pairs; a state fails when ``|s[dim]| > threshold``."""
        raise NotImplementedError

    # -- public operations ------------------------------------------------

    def _check_action(self, a):
        if not 0 <= a < self.n_actions:
            raise BadActionIndex(f"{self.name}: action {a} outside [0, {self.n_actions})")

    def _check_dim(self, n):
        if n != self.state_dim:
            raise DimMismatch(f"{self.name}: state dimension {n} != {self.state_dim}")

    def step(self, s: Sequence[float], a: int) -> tuple[float, ...]:
        self._check_dim(len(s))
        self._check_action(a)
        return tuple(self.update([float(x) for x in s], a, FLOAT_OPS))

    def step_word(self, s: Sequence[float], w: Sequence[int]) -> tuple[float, ...]:
        self._check_dim(len(s))
        out = tuple(float(x) for x in s)
        for a in w:
            out = self.step(out, a)
        return out

    def abstract_step(self, b: Box, w: Sequence[int]) -> Box:
        self._check_dim(b.n)
        if not w:
            return b
        state = list(b.dims)
        for a in w:
            self._check_action(a)
            state = self.update(state, a, INTERVAL_OPS)
            state = [x if isinstance(x, Interval) else Interval(x, x) for x in state]
        return Box.from_intervals(state)

    def is_fail(self, s: Sequence[float]) -> bool:
        self._check_dim(len(s))
        return any(abs(s[d]) > t for d, t in self.fail_bounds())

    def box_fail_status(self, b: Box) -> str:
        self._check_dim(b.n)
        for d, t in self.fail_bounds():
            if b.hi[d] > t or b.lo[d] < -t:
                return INTERSECTS_FAIL
        return ALL_SAFE

    def box_fails(self, b: Box) -> bool:
        return self.box_fail_status(b) == INTERSECTS_FAIL

    def constants(self) -> dict:
        skip = {"state_labels", "actions", "init_region"}
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in skip}


@dataclass(frozen=True)
class Pendulum(Environment):
    """Inverted pendulum, state ``(theta [rad], omega [rad/s])`` with ``theta = 0``
    upright. Semi-implicit Euler as in the classic-control benchmark: the
    velocity is updated and clipped first, then the angle uses the new velocity.
    """

    name = "pendulum"
    state_labels: tuple[str, ...] = ("theta", "omega")
    actions: tuple[str, ...] = ("left", "right")
    g: float = 10.0
    m: float = 1.0
    l: float = 1.0
    dt: float = 0.05
    torque: float = 2.0
    max_speed: float = 8.0
    theta_max: float = 1.0
    init_region: Box = field(default_factory=lambda: Box([-0.35, -0.5], [0.35, 0.5]))

    def update(self, s, a, ops):
        theta, omega = s
        u = self.torque if a == 1 else -self.torque
        grav = 3.0 * self.g / (2.0 * self.l)
        gain = 3.0 / (self.m * self.l * self.l)
        omega = ops.clip(omega + (ops.sin(theta) * grav + gain * u) * self.dt,
                         -self.max_speed, self.max_speed)
        theta = theta + omega * self.dt
        return [theta, omega]

    def fail_bounds(self):
        return ((0, self.theta_max),)


@dataclass(frozen=True)
class CartPole(Environment):
    """Pole on a cart, state ``(x [m], x_dot [m/s], theta [rad], theta_dot [rad/s])``,
    explicit Euler with the benchmark's equations of motion."""

    name = "cartpole"
    state_labels: tuple[str, ...] = ("x", "x_dot", "theta", "theta_dot")
    actions: tuple[str, ...] = ("left", "right")
    gravity: float = 9.8
    masscart: float = 1.0
    masspole: float = 0.1
    length: float = 0.5  # half the pole length
    force_mag: float = 10.0
    dt: float = 0.02
    x_threshold: float = 2.4
    theta_threshold: float = 12 * 2 * math.pi / 360
    init_region: Box = field(default_factory=lambda: Box([-0.05] * 4, [0.05] * 4))

    def update(self, s, a, ops):
        x, x_dot, theta, theta_dot = s
        force = self.force_mag if a == 1 else -self.force_mag
        total_mass = self.masspole + self.masscart
        polemass_length = self.masspole * self.length
        costheta = ops.cos(theta)
        sintheta = ops.sin(theta)
        temp = (force + polemass_length * ops.sqr(theta_dot) * sintheta) / total_mass
        thetaacc = (self.gravity * sintheta - costheta * temp) / (
            self.length * (4.0 / 3.0 - self.masspole * ops.sqr(costheta) / total_mass))
        xacc = temp - polemass_length * thetaacc * costheta / total_mass
        return [x + self.dt * x_dot,
                x_dot + self.dt * xacc,
                theta + self.dt * theta_dot,
                theta_dot + self.dt * thetaacc]

    def fail_bounds(self):
        return ((0, self.x_threshold), (2, self.theta_threshold))


ENVIRONMENTS = {"pendulum": Pendulum, "cartpole": CartPole}


def make_environment(name: str, constants: Mapping | None = None,
                     init_region=None) -> Environment:
    """Construct a benchmark by name, overriding physical constants and the
    initial region (given as ``[[lo, hi], ...]``)."""
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ConfigError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None
    env = cls()
    constants = dict(constants or {})
    known = {f.name for f in fields(cls)} - {"state_labels", "actions", "init_region"}
    unknown = set(constants) - known
    if unknown:
        raise ConfigError(f"{name}: unknown constants {sorted(unknown)}")
    if init_region is not None:
        region = init_region if isinstance(init_region, Box) else Box.from_pairs(init_region)
        if region.n != env.state_dim:
            raise ConfigError(f"{name}: init_region has {region.n} dimensions, expected {env.state_dim}")
        constants["init_region"] = region
    return replace(env, **{k: (v if k == "init_region" else float(v)) for k, v in constants.items()})


def step(env: Environment, s, a):
    return env.step(s, a)


def step_word(env: Environment, s, w):
    return env.step_word(s, w)


def abstract_step(env: Environment, b: Box, w):
    return env.abstract_step(b, w)


def is_fail(env: Environment, s) -> bool:
    return env.is_fail(s)


def box_fail_status(env: Environment, b: Box) -> str:
    return env.box_fail_status(b)
