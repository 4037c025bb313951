"""Regenerate the fixture policy networks in src/mosaic/fixtures/.

The fixtures stand in for trained DQN policies. Each is a 2-hidden-layer
ReLU network whose hidden weights are drawn from a seeded RNG and whose
output layer is fitted by least squares to q-values of a stabilising
switching law, so the decision boundary is a slightly curved version of
that law's switching surface.

    python tools/make_fixtures.py
"""
from pathlib import Path

import numpy as np

from mosaic.network import Layer, Network, forward, save_network

OUT = Path(__file__).resolve().parents[1] / "src" / "mosaic" / "fixtures"


def fit_policy(seed, scale, switch, value, hidden=16, samples=20000):
    rng = np.random.default_rng(seed)
    n = len(scale)
    x = rng.uniform(-1.0, 1.0, size=(samples, n)) * scale
    w1 = rng.normal(size=(hidden, n)) / scale
    b1 = rng.normal(scale=0.5, size=hidden)
    h1 = np.maximum(x @ w1.T + b1, 0.0)
    w2 = rng.normal(size=(hidden, hidden)) / np.sqrt(hidden)
    b2 = rng.normal(scale=0.5, size=hidden)
    h2 = np.maximum(h1 @ w2.T + b2, 0.0)
    s = switch(x)
    v = value(x)
    targets = np.stack([v + s, v - s], axis=1)  # action 0 preferred where s > 0
    feats = np.hstack([h2, np.ones((samples, 1))])
    coef, *_ = np.linalg.lstsq(feats, targets, rcond=None)
    w3, b3 = coef[:-1].T, coef[-1]
    net = Network((Layer.affine(w1, b1), Layer.relu(), Layer.affine(w2, b2), Layer.relu(),
                   Layer.affine(w3, b3)), n)
    agree = np.mean(np.argmax(forward(net, x), axis=1) == (s <= 0).astype(int))
    return net, agree


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    # pendulum: push left (action 0) when theta + 0.3 omega > 0
    net, agree = fit_policy(
        seed=7, scale=np.array([1.2, 3.0]),
        switch=lambda x: 2.0 * (x[:, 0] + 0.3 * x[:, 1]),
        value=lambda x: -(x[:, 0] ** 2 + 0.1 * x[:, 1] ** 2))
    save_network(net, OUT / "pendulum.json")
    print(f"pendulum: agreement with switching law {agree:.3f}")
    # cartpole: push right (action 1) when theta + 0.3 theta_dot + 0.1 x + 0.3 x_dot > 0
    net, agree = fit_policy(
        seed=11, scale=np.array([2.4, 2.0, 0.21, 2.0]),
        switch=lambda x: -(x[:, 2] + 0.3 * x[:, 3] + 0.1 * x[:, 0] + 0.3 * x[:, 1]),
        value=lambda x: -(x[:, 2] ** 2 + 0.01 * x[:, 0] ** 2))
    save_network(net, OUT / "cartpole.json")
    print(f"cartpole: agreement with switching law {agree:.3f}")


if __name__ == "__main__":
    main()
