import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from mosaic.errors import CannotSplit, DimMismatch
from mosaic.geometry import (Box, Interval, box_contains, box_intersects, box_max_width,
                             box_split, box_subtract, box_volume, interiors_overlap,
                             interval_add, interval_clamp, interval_cos, interval_div,
                             interval_mul, interval_sin, interval_sqr, interval_sub, split_dim)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw, elems=finite):
    a, b = draw(elems), draw(elems)
    return Interval(min(a, b), max(a, b))


@st.composite
def interval_and_point(draw, elems=finite):
    iv = draw(intervals(elems))
    t = draw(st.floats(0, 1))
    x = min(max(iv.lo + t * (iv.hi - iv.lo), iv.lo), iv.hi)
    return iv, x


def encloses_exact(iv: Interval, exact: Fraction) -> bool:
    return Fraction(iv.lo) <= exact <= Fraction(iv.hi)


# -- examples --------------------------------------------------------------

def test_add_examples():
    assert interval_add(Interval(1, 2), Interval(3, 4)) == Interval(4, 6)
    assert interval_add(Interval(0, 0), Interval(-1, 1)) == Interval(-1, 1)
    assert interval_add(Interval(-1, 2), Interval(-3, 0.5)) == Interval(-4, 2.5)


def test_mul_examples():
    assert interval_mul(Interval(-1, 2), Interval(3, 4)) == Interval(-4, 8)
    assert interval_mul(Interval(0, 0), Interval(-5, 5)) == Interval(0, 0)
    assert interval_mul(Interval(-2, -1), Interval(-3, -2)) == Interval(2, 6)


def test_sin_examples():
    assert interval_sin(Interval(0, 0)) == Interval(0, 0)
    r = interval_sin(Interval(0, math.pi))
    assert r.lo == 0.0 and r.hi == 1.0


def test_cos_quarter_against_dense_sampling():
    a = Interval(-math.pi / 4, math.pi / 4)
    r = interval_cos(a)
    mp = mpmath.mp
    mp.prec = 200
    xs = [a.lo + (a.hi - a.lo) * i / 10000 for i in range(10001)]
    vals = [mpmath.cos(mpmath.mpf(x)) for x in xs]
    assert all(r.lo <= v <= r.hi for v in vals)
    assert abs(r.lo - math.cos(math.pi / 4)) < 1e-9 and r.hi == 1.0
    assert abs(float(min(vals)) - r.lo) < 1e-9 and abs(float(max(vals)) - r.hi) < 1e-9


def test_interval_rejects_inverted():
    with pytest.raises(ValueError):
        Interval(2, 1)
    assert Interval(3, 3).width == 0


def test_division_by_interval_with_zero():
    with pytest.raises(ZeroDivisionError):
        interval_div(Interval(1, 2), Interval(-1, 1))


def test_sqr_tighter_than_mul_across_zero():
    a = Interval(-2, 3)
    assert interval_sqr(a) == Interval(0, 9)
    assert interval_mul(a, a).lo < 0


def test_clamp():
    assert interval_clamp(Interval(-10, 3), -8, 8) == Interval(-8, 3)
    assert interval_clamp(Interval(9, 10), -8, 8) == Interval(8, 8)


# -- enclosure against exact rational arithmetic ---------------------------

@given(interval_and_point(), interval_and_point())
def test_add_sub_enclose(ax, by):
    (a, x), (b, y) = ax, by
    assert encloses_exact(interval_add(a, b), Fraction(x) + Fraction(y))
    assert encloses_exact(interval_sub(a, b), Fraction(x) - Fraction(y))
    # endpoints are the correctly rounded-outward images of the exact endpoints
    s = interval_add(a, b)
    assert Fraction(s.lo) <= Fraction(a.lo) + Fraction(b.lo)
    assert Fraction(s.hi) >= Fraction(a.hi) + Fraction(b.hi)


@given(interval_and_point(), interval_and_point())
def test_mul_encloses(ax, by):
    (a, x), (b, y) = ax, by
    assert encloses_exact(interval_mul(a, b), Fraction(x) * Fraction(y))


@given(interval_and_point())
def test_sqr_encloses(ax):
    a, x = ax
    assert encloses_exact(interval_sqr(a), Fraction(x) ** 2)


@given(interval_and_point(), interval_and_point(st.floats(0.5, 100)))
def test_div_encloses(ax, by):
    (a, x), (b, y) = ax, by
    for bb, yy in ((b, y), (-b, -y)):
        assert encloses_exact(interval_div(a, bb), Fraction(x) / Fraction(yy))


@given(interval_and_point(st.floats(-20, 20)))
def test_trig_encloses(ax):
    a, x = ax
    mpmath.mp.prec = 200
    for fn, mfn in ((interval_sin, mpmath.sin), (interval_cos, mpmath.cos)):
        r = fn(a)
        v = mfn(mpmath.mpf(x))
        assert r.lo <= v <= r.hi
        assert -1.0 <= r.lo <= r.hi <= 1.0


@given(intervals(st.floats(-20, 20)))
def test_trig_tight_without_critical_points(a):
    # with no extremum inside, the result is the endpoint image up to one ulp
    for fn, f, crit in ((interval_sin, math.sin, math.pi / 2), (interval_cos, math.cos, 0.0)):
        k_lo = math.ceil((a.lo - crit) / math.pi - 1e-6)
        if crit + k_lo * math.pi <= a.hi + 1e-6:
            continue
        r = fn(a)
        lo, hi = sorted((f(a.lo), f(a.hi)))
        assert lo - r.lo <= 2 * math.ulp(lo) + 0.0 and r.hi - hi <= 2 * math.ulp(hi)


@given(st.floats(allow_nan=False), st.floats(allow_nan=False))
def test_extreme_magnitudes_enclose(x, y):
    from mosaic.geometry import add_down, add_up, div_down, div_up, mul_down, mul_up
    if math.isinf(x) or math.isinf(y):
        return
    fx, fy = Fraction(x), Fraction(y)
    for lo_fn, hi_fn, exact in ((add_down, add_up, fx + fy), (mul_down, mul_up, fx * fy)):
        lo, hi = lo_fn(x, y), hi_fn(x, y)
        assert (lo == -math.inf or Fraction(lo) <= exact) and (hi == math.inf or exact <= Fraction(hi))
    if y != 0:
        lo, hi = div_down(x, y), div_up(x, y)
        assert (lo == -math.inf or Fraction(lo) <= fx / fy) and (hi == math.inf or fx / fy <= Fraction(hi))


def test_exact_operations_stay_exact():
    assert interval_mul(Interval(0.5, 0.5), Interval(3, 3)) == Interval(1.5, 1.5)
    r = interval_add(Interval(0.1, 0.1), Interval(0.2, 0.2))
    assert r.lo < r.hi  # 0.1 + 0.2 is inexact, so the enclosure has width


# -- boxes -----------------------------------------------------------------

def test_split_examples():
    assert box_split(Box([0, 0], [4, 1])) == (Box([0, 0], [2, 1]), Box([2, 0], [4, 1]))
    assert box_split(Box([0, 0], [1, 1])) == (Box([0, 0], [0.5, 1]), Box([0.5, 0], [1, 1]))
    assert box_split(Box([-1], [1])) == (Box([-1], [0]), Box([0], [1]))


def test_split_degenerate():
    with pytest.raises(CannotSplit):
        box_split(Box([1, 2], [1, 2]))


def test_predicate_examples():
    assert box_contains(Box([0, 0], [1, 1]), (0.5, 1.0))
    assert box_volume(Box([0, 0], [2, 3])) == 6
    assert box_intersects(Box([0], [1]), Box([1], [2]))
    assert box_max_width(Box([0, 0], [2, 3])) == 3


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        box_contains(Box([0, 0], [1, 1]), (0.5,))
    with pytest.raises(DimMismatch):
        box_intersects(Box([0], [1]), Box([0, 0], [1, 1]))


def test_box_identity_and_hash():
    a, b = Box([0, 1], [2, 3]), Box((0.0, 1.0), (2.0, 3.0))
    assert a == b and hash(a) == hash(b) and len({a, b}) == 1
    assert a[1] == Interval(1, 3)
    with pytest.raises(AttributeError):
        a.lo = (5, 5)


@st.composite
def boxes(draw, n=None):
    n = n or draw(st.integers(1, 4))
    lo, hi = [], []
    for _ in range(n):
        a, b = draw(st.floats(-100, 100)), draw(st.floats(-100, 100))
        if a == b:
            b = a + 1.0
        lo.append(min(a, b))
        hi.append(max(a, b))
    return Box(lo, hi)


def exact_volume(b):
    v = Fraction(1)
    for lo, hi in zip(b.lo, b.hi):
        v *= Fraction(hi) - Fraction(lo)
    return v


@given(boxes())
@example(Box([0.0, 0.0], [1.0, 5e-324]))
@example(Box([0.0], [5e-324]))
def test_split_partitions(b):
    d = split_dim(b)
    if math.nextafter(b.lo[d], math.inf) >= b.hi[d]:
        # no float strictly inside the widest side
        with pytest.raises(CannotSplit):
            box_split(b)
        return
    h1, h2 = box_split(b)
    assert next(i for i in range(b.n) if h1.hi[i] != b.hi[i]) == d
    assert h1.hi[d] == h2.lo[d]
    assert h1.lo == b.lo and h2.hi == b.hi
    assert exact_volume(h1) + exact_volume(h2) == exact_volume(b)
    assert b.widths[d] == box_max_width(b)
    assert not interiors_overlap(h1, h2)


@given(boxes(3), boxes(3), st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
                                    min_size=20, max_size=20))
def test_subtract_tiles(a, b, ts):
    frags = box_subtract(a, b)
    assert len(frags) <= 6
    for i, f in enumerate(frags):
        for g in frags[i + 1:]:
            assert not interiors_overlap(f, g)
    for t in ts:
        p = [min(max(lo + ti * (hi - lo), lo), hi) for lo, hi, ti in zip(a.lo, a.hi, t)]
        inside_b = box_contains(b, p)
        in_frag = any(box_contains(f, p) for f in frags)
        assert inside_b or in_frag
