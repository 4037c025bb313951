"""Feed-forward ReLU policy networks and sound output bounds over boxes.

Two bounding procedures are provided. ``bounds_interval`` pushes intervals
through each layer. ``bounds_planet`` carries a linear lower and upper form
(in the input variables) for every neuron and relaxes unstable ReLUs with the
triangle constraints ``y >= 0``, ``y >= x``, ``y <= u (x - l) / (u - l)``.
Both have batched variants working on ``(B, n)`` arrays of box corners,
which is what the branch-and-bound loop calls.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import BadActionIndex, DimMismatch, ParseError, ShapeMismatch
from .geometry import Box

# relative slack added on top of the one-ulp outward widening; absorbs
# rounding in float64 propagation that is not tracked operation by operation
_REL_SLACK = 1e-12


@dataclass(frozen=True)
class Layer:
    kind: str  # "affine" | "relu"
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None

    @classmethod
    def affine(cls, weights, bias) -> "Layer":
        w = np.array(weights, dtype=np.float64, ndmin=2)
        b = np.array(bias, dtype=np.float64).reshape(-1)
        if w.shape[0] != b.shape[0]:
            raise ShapeMismatch(f"weights have {w.shape[0]} rows, bias has {b.shape[0]} entries")
        w.setflags(write=False)
        b.setflags(write=False)
        return cls("affine", w, b)

    @classmethod
    def relu(cls) -> "Layer":
        return cls("relu")


@dataclass(frozen=True)
class OutputBounds:
    lb: np.ndarray
    ub: np.ndarray


@dataclass(frozen=True)
class Network:
    """Sequence of affine and ReLU layers; the outputs are q-values."""

    layers: tuple[Layer, ...]
    input_dim: int
    output_dim: int = field(init=False)

    def __post_init__(self):
        dim = self.input_dim
        if dim < 1:
            raise ShapeMismatch("input_dim must be positive")
        for i, layer in enumerate(self.layers):
            if layer.kind == "affine":
                if layer.weights.shape[1] != dim:
                    raise ShapeMismatch(
                        f"layer {i}: expects {layer.weights.shape[1]} inputs, receives {dim}")
                dim = layer.weights.shape[0]
            elif layer.kind != "relu":
                raise ShapeMismatch(f"layer {i}: unknown kind {layer.kind!r}")
        if dim < 1:
            raise ShapeMismatch("network must have at least one output")
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "output_dim", dim)

    def __call__(self, x):
        return forward(self, x)

    @cached_property
    def bound_layers(self) -> tuple[Layer, ...]:
        # consecutive affine layers collapsed, so bounds on ReLU-free stretches are exact
        return tuple(_merge_affine_runs(self.layers))


# -- serialisation ---------------------------------------------------------

def network_from_dict(data: dict) -> Network:
    try:
        input_dim = int(data["input_dim"])
        layers = []
        for entry in data["layers"]:
            kind = entry["kind"]
            if kind == "affine":
                w, b = entry["weights"], entry["bias"]
                if not w or any(len(row) != len(w[0]) for row in w):
                    raise ShapeMismatch("weights must be a non-empty rectangular matrix")
                layers.append(Layer.affine(w, b))
            elif kind == "relu":
                layers.append(Layer.relu())
            else:
                raise ParseError(f"unknown layer kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed network description: {exc!r}") from exc
    return Network(tuple(layers), input_dim)


def network_to_dict(net: Network) -> dict:
    layers = []
    for layer in net.layers:
        if layer.kind == "affine":
            layers.append({"kind": "affine", "weights": layer.weights.tolist(),
                           "bias": layer.bias.tolist()})
        else:
            layers.append({"kind": "relu"})
    return {"input_dim": net.input_dim, "layers": layers}


def load_network(path) -> Network:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return network_from_dict(data)


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)))


# -- evaluation ------------------------------------------------------------

def forward(net: Network, x) -> np.ndarray:
    """Exact forward pass; accepts one point ``(n,)`` or a batch ``(B, n)``."""
    h = np.asarray(x, dtype=np.float64)
    if h.shape[-1] != net.input_dim:
        raise DimMismatch(f"input has dimension {h.shape[-1]}, network expects {net.input_dim}")
    for layer in net.layers:
        if layer.kind == "affine":
            h = h @ layer.weights.T + layer.bias
        else:
            h = np.maximum(h, 0.0)
    return h


def policy_action(net: Network, x):
    """Greedy action: index of the largest q-value, lowest index on ties."""
    q = forward(net, x)
    a = np.argmax(q, axis=-1)
    return int(a) if np.ndim(a) == 0 else a


def _compose_affine(first: Layer, second: Layer) -> Layer:
    return Layer.affine(second.weights @ first.weights, second.weights @ first.bias + second.bias)


def add_action_layer(net: Network, a: int) -> Network:
    """Scalar network computing ``max_{a' != a} (q_a' - q_a)``.

    Negative exactly where ``a`` is the strict argmax. The differences are
    folded into the last affine layer; the max over several differences
    is built from ``max(x, y) = y + relu(x - y)``, with ``y`` carried through
    the ReLU as ``relu(y) - relu(-y)``.
    """
    m = net.output_dim
    if m < 2:
        raise BadActionIndex("action layer needs at least two actions")
    if not 0 <= a < m:
        raise BadActionIndex(f"action {a} outside [0, {m})")
    rows = []
    for other in range(m):
        if other != a:
            r = np.zeros(m)
            r[other] = 1.0
            r[a] = -1.0
            rows.append(r)
    diff = Layer.affine(np.array(rows), np.zeros(len(rows)))
    layers = list(net.layers)
    if layers and layers[-1].kind == "affine":
        layers[-1] = _compose_affine(layers[-1], diff)
    else:
        layers.append(diff)
    width = len(rows)
    while width > 1:
        pairs, odd = divmod(width, 2)
        hidden = 3 * pairs + 2 * odd
        w1 = np.zeros((hidden, width))
        w2 = np.zeros((pairs + odd, hidden))
        for p in range(pairs):
            x, y = 2 * p, 2 * p + 1
            w1[3 * p, x], w1[3 * p, y] = 1.0, -1.0   # relu(x - y)
            w1[3 * p + 1, y] = 1.0                  # relu(y)
            w1[3 * p + 2, y] = -1.0                 # relu(-y)
            w2[p, 3 * p: 3 * p + 3] = (1.0, 1.0, -1.0)
        if odd:
            h = 3 * pairs
            w1[h, width - 1], w1[h + 1, width - 1] = 1.0, -1.0
            w2[pairs, h], w2[pairs, h + 1] = 1.0, -1.0
        layers.append(Layer.affine(w1, np.zeros(hidden)))
        layers.append(Layer.relu())
        layers.append(Layer.affine(w2, np.zeros(pairs + odd)))
        width = pairs + odd
    return Network(tuple(_merge_affine_runs(layers)), net.input_dim)


def _merge_affine_runs(layers):
    out = []
    for layer in layers:
        if layer.kind == "affine" and out and out[-1].kind == "affine":
            out[-1] = _compose_affine(out[-1], layer)
        else:
            out.append(layer)
    return out


# -- bounds ----------------------------------------------------------------

def _as_batch(net: Network, lo, hi):
    lo = np.atleast_2d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_2d(np.asarray(hi, dtype=np.float64))
    if lo.shape[-1] != net.input_dim or hi.shape != lo.shape:
        raise DimMismatch(f"box dimension {lo.shape[-1]} != network input {net.input_dim}")
    return lo, hi


def _widen(lo, hi, mag):
    slack = _REL_SLACK * (1.0 + mag)
    return np.nextafter(lo - slack, -np.inf), np.nextafter(hi + slack, np.inf)


def _affine_interval(layer, lo, hi):
    wp = np.maximum(layer.weights, 0.0)
    wn = np.minimum(layer.weights, 0.0)
    new_lo = lo @ wp.T + hi @ wn.T + layer.bias
    new_hi = hi @ wp.T + lo @ wn.T + layer.bias
    mag = np.maximum(np.abs(lo), np.abs(hi)) @ np.abs(layer.weights).T + np.abs(layer.bias)
    return new_lo, new_hi, mag


def interval_bounds_batch(net: Network, lo, hi):
    """Interval propagation for a batch of boxes; returns ``(lb, ub)`` of shape ``(B, m)``."""
    lo, hi = _as_batch(net, lo, hi)
    mag = np.maximum(np.abs(lo), np.abs(hi))
    for layer in net.bound_layers:
        if layer.kind == "affine":
            lo, hi, mag = _affine_interval(layer, lo, hi)
        else:
            lo, hi = np.maximum(lo, 0.0), np.maximum(hi, 0.0)
    return _widen(lo, hi, mag)


def _concretize(coef, const, lo, hi):
    # coef: (B, k, n), const: (B, k), box corners (B, n)
    cp = np.maximum(coef, 0.0)
    cn = np.minimum(coef, 0.0)
    hi, lo = hi[..., None], lo[..., None]
    up = (cp @ hi + cn @ lo)[..., 0] + const
    dn = (cp @ lo + cn @ hi)[..., 0] + const
    return dn, up


def planet_bounds_batch(net: Network, lo, hi):
    """Symbolic linear bound propagation with the triangle ReLU relaxation.

    Each neuron's concrete range is the intersection of its symbolic and
    plain interval ranges, so the result never loses to interval propagation.
    """
    lo, hi = _as_batch(net, lo, hi)
    batch, n = lo.shape
    eye = np.broadcast_to(np.eye(n), (batch, n, n))
    lc, uc = eye.copy(), eye.copy()                    # coefficient forms (B, k, n)
    lk, uk = np.zeros((batch, n)), np.zeros((batch, n))  # constants (B, k)
    ilo, ihi = lo, hi                                  # plain interval ranges
    l, u = lo, hi                                      # best concrete ranges
    mag = np.maximum(np.abs(lo), np.abs(hi))
    for layer in net.bound_layers:
        if layer.kind == "affine":
            w, b = layer.weights, layer.bias
            wp, wn = np.maximum(w, 0.0), np.minimum(w, 0.0)
            lc, uc = wp @ lc + wn @ uc, wp @ uc + wn @ lc
            lk, uk = lk @ wp.T + uk @ wn.T + b, uk @ wp.T + lk @ wn.T + b
            mag = np.maximum(np.abs(l), np.abs(u)) @ np.abs(w).T + np.abs(b)
            ilo, ihi = l @ wp.T + u @ wn.T + b, u @ wp.T + l @ wn.T + b
            slo, _ = _concretize(lc, lk, lo, hi)
            _, shi = _concretize(uc, uk, lo, hi)
            l, u = np.maximum(slo, ilo), np.minimum(shi, ihi)
        else:
            dead = u <= 0.0
            live = l >= 0.0
            unstable = ~(dead | live)
            denom = np.where(unstable, u - l, 1.0)
            slope = np.where(unstable, u / denom, np.where(live, 1.0, 0.0))
            shift = np.where(unstable, -slope * l, 0.0)
            # upper: y <= slope * (x - l) <= slope * U(x) + shift
            uc = uc * slope[..., None]
            uk = uk * slope + shift
            # lower: identity for live, zero for dead, y >= x or y >= 0 by area
            keep = live | (unstable & (u > -l))
            lc = lc * keep[..., None]
            lk = lk * keep
            l, u = np.maximum(l, 0.0), np.maximum(u, 0.0)
            # y >= 0 always holds; don't let a y >= x form drop the bound below it
            l = np.where(keep & ~live, np.maximum(l, 0.0), l)
    return _widen(l, u, mag)


def bounds_interval(net: Network, b: Box) -> OutputBounds:
    lb, ub = interval_bounds_batch(net, [b.lo], [b.hi])
    return OutputBounds(lb[0], ub[0])


def bounds_planet(net: Network, b: Box) -> OutputBounds:
    lb, ub = planet_bounds_batch(net, [b.lo], [b.hi])
    return OutputBounds(lb[0], ub[0])


BOUND_METHODS = {"planet": planet_bounds_batch, "interval": interval_bounds_batch}
