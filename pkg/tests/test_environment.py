import math

import numpy as np
import pytest
from _tracer import peak_magnitude
from hypothesis import given
from hypothesis import strategies as st

from mosaic.environment import (ALL_SAFE, INTERSECTS_FAIL, CartPole, Pendulum, abstract_step,
                                box_fail_status, is_fail, make_environment, step, step_word)
from mosaic.errors import BadActionIndex, ConfigError, DimMismatch
from mosaic.geometry import Box, box_contains, box_subset

ENVS = [Pendulum(), CartPole()]


def cartpole_reference(s, a):
    # independent transcription of the classic-control cart-pole update
    x, x_dot, theta, theta_dot = s
    gravity, masscart, masspole, length, force_mag, tau = 9.8, 1.0, 0.1, 0.5, 10.0, 0.02
    total_mass = masspole + masscart
    polemass_length = masspole * length
    force = force_mag if a == 1 else -force_mag
    costheta, sintheta = math.cos(theta), math.sin(theta)
    temp = (force + polemass_length * theta_dot ** 2 * sintheta) / total_mass
    thetaacc = (gravity * sintheta - costheta * temp) / (
        length * (4.0 / 3.0 - masspole * costheta ** 2 / total_mass))
    xacc = temp - polemass_length * thetaacc * costheta / total_mass
    return (x + tau * x_dot, x_dot + tau * xacc, theta + tau * theta_dot,
            theta_dot + tau * thetaacc)


def test_pendulum_step_example():
    theta, omega = Pendulum().step((0.0, 0.0), 1)
    assert math.isclose(omega, 3 * 2 / 1 * 0.05)
    assert math.isclose(theta, 0.05 * omega)
    theta, omega = step(Pendulum(), (0.0, 0.0), 0)
    assert math.isclose(omega, -0.3)


def test_pendulum_clips_speed():
    assert Pendulum().step((0.5, 7.99), 1)[1] == 8.0
    assert Pendulum().step((-0.5, -7.99), 0)[1] == -8.0


def test_cartpole_against_reference():
    env = CartPole()
    s0 = (0.0, 0.0, 0.0, 0.0)
    nxt = env.step(s0, 1)
    assert np.allclose(nxt, cartpole_reference(s0, 1), rtol=1e-14, atol=1e-15)
    # at rest, the push gives xacc > 0 and thetaacc < 0, visible after a second step
    two = env.step(nxt, 1)
    assert two[1] > 0 and two[3] < 0
    rng = np.random.default_rng(0)
    for s in rng.uniform(-0.2, 0.2, size=(200, 4)):
        for a in (0, 1):
            assert np.allclose(env.step(s, a), cartpole_reference(s, a), rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.name)
def test_step_word_identities(env):
    s = tuple(0.01 * (i + 1) for i in range(env.state_dim))
    assert step_word(env, s, ()) == s
    assert step_word(env, s, (1,)) == step(env, s, 1)
    assert step_word(env, s, (0, 0)) == step(env, step(env, s, 0), 0)
    assert step_word(env, s, (1, 0)) == step(env, step(env, s, 1), 0)


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.name)
def test_errors(env):
    s = (0.0,) * env.state_dim
    with pytest.raises(BadActionIndex):
        env.step(s, 2)
    with pytest.raises(DimMismatch):
        env.step(s + (0.0,), 0)
    with pytest.raises(DimMismatch):
        env.is_fail(s[:-1])
    with pytest.raises(DimMismatch):
        env.abstract_step(Box([0.0], [1.0]), (0,))
    with pytest.raises(BadActionIndex):
        env.abstract_step(Box.point(s), (0, 5))


def test_fail_examples():
    cp = CartPole()
    assert is_fail(cp, (3.0, 0, 0, 0))
    assert not is_fail(cp, (2.4, 0, 0, 0))
    assert is_fail(cp, (0, 0, 0.21, 0)) and not is_fail(cp, (0, 0, 0.2, 0))
    assert box_fail_status(cp, cp.init_region) == ALL_SAFE
    t = 12 * 2 * math.pi / 360
    assert box_fail_status(cp, Box([0, 0, t - 0.01, 0], [0, 0, t + 0.01, 0])) == INTERSECTS_FAIL
    assert Pendulum().is_fail((1.01, 0)) and not Pendulum().is_fail((1.0, 0))


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.name)
def test_abstract_step_identity_and_point(env):
    b = env.init_region
    assert abstract_step(env, b, ()) == b
    rng = np.random.default_rng(1)
    for s in rng.uniform(b.lo, b.hi, size=(50, env.state_dim)):
        for a in (0, 1):
            r = env.abstract_step(Box.point(s), (a,))
            assert box_contains(r, env.step(s, a))


def containment_trials(env, trials, seed):
    rng = np.random.default_rng(seed)
    lo = np.array(env.init_region.lo) * 6
    hi = np.array(env.init_region.hi) * 6
    violations = 0
    for _ in range(trials):
        c = rng.uniform(lo, hi)
        w = rng.uniform(0, (hi - lo) / 4)
        b = Box(c - w, c + w)
        s = rng.uniform(b.lo, b.hi)
        word = tuple(int(a) for a in rng.integers(0, 2, size=rng.integers(0, 3)))
        if not box_contains(env.abstract_step(b, word), env.step_word(s, word)):
            violations += 1
    return violations


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.name)
def test_containment_monte_carlo(env):
    assert containment_trials(env, 1000, 11) == 0


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.name)
def test_containment_vertices(env):
    # box corners stress the endpoint arithmetic
    rng = np.random.default_rng(4)
    for _ in range(100):
        c = rng.uniform(-0.3, 0.3, size=env.state_dim)
        w = rng.uniform(0, 0.2, size=env.state_dim)
        b = Box(c - w, c + w)
        corners = np.array(np.meshgrid(*zip(b.lo, b.hi))).reshape(env.state_dim, -1).T
        for word in ((0,), (1,), (0, 0), (1, 1)):
            r = env.abstract_step(b, word)
            assert all(box_contains(r, env.step_word(s, word)) for s in corners)


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.name)
def test_point_box_tightness(env):
    # width of a one-step image of a point, in ulps of the largest magnitude
    # met during the update (cancellation makes the per-coordinate ulp meaningless)
    rng = np.random.default_rng(8)
    b = env.init_region
    worst = 0.0
    for s in rng.uniform(b.lo, b.hi, size=(300, env.state_dim)):
        for a in (0, 1):
            r = env.abstract_step(Box.point(s), (a,))
            scale = math.ulp(peak_magnitude(env, s, a))
            worst = max(worst, max(w / scale for w in r.widths))
    assert worst <= 16


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4),
       st.lists(st.floats(0, 0.5), min_size=4, max_size=4),
       st.lists(st.floats(0, 0.5), min_size=4, max_size=4))
def test_fail_monotone(c, w1, extra):
    env = CartPole()
    small = Box([x - a for x, a in zip(c, w1)], [x + a for x, a in zip(c, w1)])
    big = Box([x - a - e for x, a, e in zip(c, w1, extra)], [x + a + e for x, a, e in zip(c, w1, extra)])
    assert box_subset(small, big)
    if env.box_fails(small):
        assert env.box_fails(big)


def test_make_environment():
    env = make_environment("pendulum", {"theta_max": 0.4, "g": 9.81},
                           [[-0.1, 0.1], [-0.2, 0.2]])
    assert env.theta_max == 0.4 and env.g == 9.81 and env.init_region == Box([-0.1, -0.2], [0.1, 0.2])
    assert env.constants()["dt"] == 0.05
    with pytest.raises(ConfigError):
        make_environment("acrobot")
    with pytest.raises(ConfigError):
        make_environment("cartpole", {"mass": 2})
    with pytest.raises(ConfigError):
        make_environment("cartpole", init_region=[[0, 1]])


def test_declared_shapes():
    assert (Pendulum().state_dim, Pendulum().n_actions) == (2, 2)
    assert (CartPole().state_dim, CartPole().n_actions) == (4, 2)
    assert Pendulum().init_region == Box([-0.35, -0.5], [0.35, 0.5])
    assert CartPole().init_region == Box([-0.05] * 4, [0.05] * 4)
