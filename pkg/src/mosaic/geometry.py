"""Intervals and boxes with outward-rounded arithmetic.

Sums and products use error-free transformations (TwoSum / Dekker's
TwoProduct) to decide the sign of the rounding error, so an exactly
representable result is returned unchanged and an inexact one is moved one
ulp in the direction that keeps the true value enclosed. Quotients use the exact
remainder the same way. sin and cos are widened by one ulp unconditionally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CannotSplit, DimMismatch

INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1
_TWO_PI = 2.0 * math.pi
_HALF_PI = 0.5 * math.pi


def down(x: float) -> float:
    return math.nextafter(x, -INF)


def up(x: float) -> float:
    return math.nextafter(x, INF)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    # exact only away from overflow and underflow; callers screen for that
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    return p, err


_TINY = 2.0 ** -900   # below this an error term may underflow
_HUGE = 2.0 ** 990    # above this the splitter overflows
_MAX = 1.7976931348623157e308


def _extreme(a, b, r):
    # a and b are nonzero here; r is their product or quotient
    return not (_TINY <= abs(r) <= _HUGE and _TINY <= abs(a) <= _HUGE
                and _TINY <= abs(b) <= _HUGE)


def _overflow_down(r, *args):
    # an overflowed lower bound from finite arguments: largest finite float
    # when positive; -inf is already a valid lower bound
    return _MAX if r == INF and all(map(math.isfinite, args)) else down(r)


def _overflow_up(r, *args):
    return -_MAX if r == -INF and all(map(math.isfinite, args)) else up(r)


def add_down(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    if math.isinf(s):
        return _overflow_down(s, a, b)
    return down(s) if e < 0 else s


def add_up(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    if math.isinf(s):
        return _overflow_up(s, a, b)
    return up(s) if e > 0 else s


def mul_down(a: float, b: float) -> float:
    p = a * b
    if a == 0.0 or b == 0.0:
        return 0.0
    if math.isinf(p) or _extreme(a, b, p):
        return _overflow_down(p, a, b)
    return down(p) if _two_prod(a, b)[1] < 0 else p


def mul_up(a: float, b: float) -> float:
    p = a * b
    if a == 0.0 or b == 0.0:
        return 0.0
    if math.isinf(p) or _extreme(a, b, p):
        return _overflow_up(p, a, b)
    return up(p) if _two_prod(a, b)[1] > 0 else p


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]``; degenerate intervals are allowed."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other):
        return interval_add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return interval_sub(self, _lift(other))

    def __rsub__(self, other):
        return interval_sub(_lift(other), self)

    def __mul__(self, other):
        return interval_mul(self, _lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return interval_div(self, _lift(other))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __iter__(self):
        yield self.lo
        yield self.hi


def _lift(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(x, x)


def interval_add(a: Interval, b: Interval) -> Interval:
    return Interval(add_down(a.lo, b.lo), add_up(a.hi, b.hi))


def interval_sub(a: Interval, b: Interval) -> Interval:
    return Interval(add_down(a.lo, -b.hi), add_up(a.hi, -b.lo))


def interval_mul(a: Interval, b: Interval) -> Interval:
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    prods = [x * y for x, y in pairs]
    if any(math.isnan(p) for p in prods):
        raise ValueError(f"undefined product {a} * {b}")
    # rounding is monotone, so only the pairs attaining the float extremes
    # can attain the directed-rounded extremes
    pmin, pmax = min(prods), max(prods)
    lo = min(mul_down(*xy) for xy, p in zip(pairs, prods) if p == pmin)
    hi = max(mul_up(*xy) for xy, p in zip(pairs, prods) if p == pmax)
    return Interval(lo, hi)


def interval_sqr(a: Interval) -> Interval:
    """Square, tighter than ``a * a`` when ``a`` straddles zero."""
    if a.lo >= 0:
        return Interval(mul_down(a.lo, a.lo), mul_up(a.hi, a.hi))
    if a.hi <= 0:
        return Interval(mul_down(a.hi, a.hi), mul_up(a.lo, a.lo))
    m = max(-a.lo, a.hi)
    return Interval(0.0, mul_up(m, m))


def div_down(a: float, b: float) -> float:
    q = a / b
    if a == 0.0:
        return 0.0
    if math.isinf(q) or _extreme(a, b, q):
        return _overflow_down(q, a, b)
    p, e = _two_prod(q, b)
    r = (a - p) - e  # exact remainder a - q*b
    return down(q) if (r < 0 < b or b < 0 < r) else q


def div_up(a: float, b: float) -> float:
    q = a / b
    if a == 0.0:
        return 0.0
    if math.isinf(q) or _extreme(a, b, q):
        return _overflow_up(q, a, b)
    p, e = _two_prod(q, b)
    r = (a - p) - e
    return up(q) if (r > 0 and b > 0) or (r < 0 and b < 0) else q


def interval_div(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        raise ZeroDivisionError(f"divisor {b} contains zero")
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    quots = [x / y for x, y in pairs]
    qmin, qmax = min(quots), max(quots)
    lo = min(div_down(*xy) for xy, q in zip(pairs, quots) if q == qmin)
    hi = max(div_up(*xy) for xy, q in zip(pairs, quots) if q == qmax)
    return Interval(lo, hi)


def interval_clamp(a: Interval, lo: float, hi: float) -> Interval:
    """Image of ``a`` under ``x -> min(max(x, lo), hi)``."""
    return Interval(min(max(a.lo, lo), hi), min(max(a.hi, lo), hi))


def _contains_point_mod(a: Interval, offset: float) -> bool:
    # is there an integer k with offset + 2*pi*k in a? Borderline answers
    # resolve to True, which only ever widens the result.
    k = math.ceil((a.lo - offset) / _TWO_PI - 1e-9)
    return offset + _TWO_PI * k <= a.hi + 1e-9 * max(1.0, abs(a.hi))


def _trig_endpoint(fn, x):
    v = fn(x)
    if x == 0.0:
        return v, v  # sin 0 and cos 0 are exact
    return down(v), up(v)


def _trig(a: Interval, fn, max_at: float, min_at: float) -> Interval:
    if a.hi - a.lo >= _TWO_PI:
        return Interval(-1.0, 1.0)
    la, ha = _trig_endpoint(fn, a.lo)
    lb, hb = _trig_endpoint(fn, a.hi)
    lo, hi = min(la, lb), max(ha, hb)
    if _contains_point_mod(a, max_at):
        hi = 1.0
    if _contains_point_mod(a, min_at):
        lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def interval_sin(a: Interval) -> Interval:
    return _trig(a, math.sin, _HALF_PI, -_HALF_PI)


def interval_cos(a: Interval) -> Interval:
    return _trig(a, math.cos, 0.0, math.pi)


class Box:
    """Axis-aligned closed box ``[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]``.

    Immutable and hashable; equality is bitwise equality of the bounds.
    """

    __slots__ = ("lo", "hi", "_hash")

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        lo = tuple(float(v) for v in lo)
        hi = tuple(float(v) for v in hi)
        if len(lo) != len(hi) or not lo:
            raise DimMismatch("box needs matching, non-empty bound vectors")
        for a, b in zip(lo, hi):
            if not a <= b:
                raise ValueError(f"invalid box bounds {lo} {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "_hash", hash((lo, hi)))

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @classmethod
    def from_intervals(cls, dims: Iterable[Interval]) -> "Box":
        dims = list(dims)
        return cls([d.lo for d in dims], [d.hi for d in dims])

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "Box":
        pairs = [tuple(p) for p in pairs]
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def point(cls, x: Sequence[float]) -> "Box":
        return cls(x, x)

    @property
    def dims(self) -> tuple[Interval, ...]:
        return tuple(Interval(a, b) for a, b in zip(self.lo, self.hi))

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    def pairs(self) -> list[list[float]]:
        return [[a, b] for a, b in zip(self.lo, self.hi)]

    def __eq__(self, other):
        return isinstance(other, Box) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = " x ".join(f"[{a:.6g}, {b:.6g}]" for a, b in zip(self.lo, self.hi))
        return f"Box({inner})"

    def __getitem__(self, i) -> Interval:
        return Interval(self.lo[i], self.hi[i])

    def __len__(self):
        return len(self.lo)

    def __reduce__(self):
        return (Box, (self.lo, self.hi))


def _check_dims(a: Box, n: int):
    if a.n != n:
        raise DimMismatch(f"dimension {a.n} != {n}")


def box_contains(b: Box, p: Sequence[float]) -> bool:
    _check_dims(b, len(p))
    return all(lo <= x <= hi for lo, x, hi in zip(b.lo, p, b.hi))


def box_intersects(a: Box, b: Box) -> bool:
    _check_dims(a, b.n)
    return all(al <= bh and bl <= ah for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi))


def box_subset(a: Box, b: Box) -> bool:
    """True when ``a`` is contained in ``b``."""
    _check_dims(a, b.n)
    return all(bl <= al and ah <= bh for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi))


def box_intersection(a: Box, b: Box) -> Box | None:
    _check_dims(a, b.n)
    lo = [max(x, y) for x, y in zip(a.lo, b.lo)]
    hi = [min(x, y) for x, y in zip(a.hi, b.hi)]
    if any(l > h for l, h in zip(lo, hi)):
        return None
    return Box(lo, hi)


def box_hull(a: Box, b: Box) -> Box:
    _check_dims(a, b.n)
    return Box([min(x, y) for x, y in zip(a.lo, b.lo)], [max(x, y) for x, y in zip(a.hi, b.hi)])


def box_volume(b: Box) -> float:
    return math.prod(b.widths)


def box_max_width(b: Box) -> float:
    return max(b.widths)


def split_dim(b: Box, scale: Sequence[float] | None = None) -> int:
    """Dimension of largest (optionally scaled) width; ties go to the lowest index."""
    w = b.widths
    if scale is not None:
        w = [x / s for x, s in zip(w, scale)]
    best = 0
    for i in range(1, len(w)):
        if w[i] > w[best]:
            best = i
    return best


def box_split(b: Box, scale: Sequence[float] | None = None) -> tuple[Box, Box]:
    """Halve ``b`` across its widest dimension.

    ``scale`` divides the widths before the comparison, so extraction can
    split relative to per-dimension precision. The halves share the midpoint.
    Raises :class:`CannotSplit` when no float lies strictly inside that side,
    which includes every degenerate box.
    """
    d = split_dim(b, scale)
    lo, hi = b.lo[d], b.hi[d]
    mid = 0.5 * (lo + hi)
    if not lo < mid < hi:
        raise CannotSplit(f"cannot split {b} along dimension {d}")
    h1 = list(b.hi)
    h1[d] = mid
    l2 = list(b.lo)
    l2[d] = mid
    return Box(b.lo, h1), Box(l2, b.hi)


def box_subtract(a: Box, b: Box) -> list[Box]:
    """Fragments of ``a`` outside the interior of ``b``.

    The fragments are pairwise interior-disjoint boxes (at most ``2n``);
    together with ``a & b`` they tile ``a``. Fragments of zero width in a
    dimension where ``a`` itself has positive width are dropped.
    """
    _check_dims(a, b.n)
    if not _interiors_overlap(a, b):
        return [a]
    out = []
    lo, hi = list(a.lo), list(a.hi)
    for d in range(a.n):
        if b.lo[d] > lo[d]:
            f_hi = list(hi)
            f_hi[d] = b.lo[d]
            out.append(Box(lo, f_hi))
            lo[d] = b.lo[d]
        if b.hi[d] < hi[d]:
            f_lo = list(lo)
            f_lo[d] = b.hi[d]
            out.append(Box(f_lo, hi))
            hi[d] = b.hi[d]
    return out


def _interiors_overlap(a: Box, b: Box) -> bool:
    # overlap with positive measure in every dimension where a is non-degenerate;
    # along degenerate dimensions closed intersection suffices
    for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi):
        if al == ah:
            if not bl <= al <= bh:
                return False
        elif not (al < bh and bl < ah):
            return False
    return True


def interiors_overlap(a: Box, b: Box) -> bool:
    """Positive-measure overlap relative to the non-degenerate dimensions of ``a``."""
    _check_dims(a, b.n)
    return _interiors_overlap(a, b)
