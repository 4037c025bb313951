import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mosaic.environment import Environment
from mosaic.geometry import Box
from mosaic.network import Layer, Network, load_network

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "src" / "mosaic" / "fixtures"


def random_net(rng, n_in, n_out, hidden=(8, 8)):
    layers, dim = [], n_in
    for h in hidden:
        layers += [Layer.affine(rng.normal(size=(h, dim)), rng.normal(size=h)), Layer.relu()]
        dim = h
    layers.append(Layer.affine(rng.normal(size=(n_out, dim)), rng.normal(size=n_out)))
    return Network(tuple(layers), n_in)


def random_box(rng, n, scale=1.0):
    c = rng.uniform(-scale, scale, size=n)
    w = rng.uniform(0.01, scale, size=n)
    return Box(c - w / 2, c + w / 2)


def sample_box(rng, b: Box, count):
    return rng.uniform(b.lo, b.hi, size=(count, b.n))


def boundary_net():
    """1-D, q0 = x, q1 = -x: action 0 for x > 0, action 1 for x < 0."""
    return Network((Layer.affine([[1.0], [-1.0]], [0.0, 0.0]),), 1)


def constant_net(n_in, a, m=2):
    bias = [0.0] * m
    bias[a] = 10.0
    return Network((Layer.affine(np.zeros((m, n_in)), bias),), n_in)


@dataclass(frozen=True)
class Line(Environment):
    """1-D toy: action 0 moves right by one, action 1 halves the state."""

    name = "line"
    state_labels: tuple = ("x",)
    actions: tuple = ("push", "halve")
    threshold: float = 1.5
    init_region: Box = Box([-1.0], [1.0])

    def update(self, s, a, ops):
        (x,) = s
        return [x + 1.0] if a == 0 else [x * 0.5]

    def fail_bounds(self):
        return ((0, self.threshold),)


@pytest.fixture(scope="session")
def pendulum_net():
    return load_network(FIXTURES / "pendulum.json")


@pytest.fixture(scope="session")
def cartpole_net():
    return load_network(FIXTURES / "cartpole.json")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300) or math.isclose(a, b)
