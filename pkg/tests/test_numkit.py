import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrolab.numkit import (
    IterMapExpr,
    RatInterval,
    critical_orbit_expr,
    dyadic_ceil,
    dyadic_floor,
    exp2_enclosure,
    floor_log2,
    format_rational,
    log2_enclosure,
    logistic_step_range,
    orbit_value_expr,
    parse_rational,
    periodic_point_expr,
    refine_root,
    root_isolate,
    simplest_rational_in,
)


def test_parse_and_format():
    assert parse_rational("3/8") == F(3, 8)
    assert parse_rational("3.5") == F(7, 2)
    assert parse_rational("1e-3") == F(1, 1000)
    assert format_rational(F(3, 8)) == "3/8"
    assert format_rational(F(2)) == "2/1"
    with pytest.raises(TypeError):
        parse_rational(0.5)


def test_interval_basics():
    iv = RatInterval(F(1, 3), F(1, 2))
    assert iv.width == F(1, 6)
    assert iv.contains(F(2, 5))
    with pytest.raises(ValueError):
        RatInterval(1, 0)
    assert RatInterval.from_json(iv.to_json()) == iv
    assert (iv + 1).lo == F(4, 3)
    assert (-iv).hi == -F(1, 3)
    prod = RatInterval(-1, 2) * RatInterval(3, 5)
    assert prod == RatInterval(-5, 10)


def test_dyadic_rounding_is_outward():
    q = F(1, 3)
    lo = dyadic_floor(q, 8)
    hi = dyadic_ceil(q, 8)
    assert lo <= q <= hi
    assert hi - lo == F(1, 256)
    assert dyadic_floor(F(1, 4), 8) == dyadic_ceil(F(1, 4), 8) == F(1, 4)


def test_floor_log2():
    assert floor_log2(F(1)) == 0
    assert floor_log2(F(3, 2)) == 0
    assert floor_log2(F(2)) == 1
    assert floor_log2(F(1, 3)) == -2


def test_log2_exact_powers():
    enc = log2_enclosure(RatInterval.point(2), 20)
    assert enc.lo == enc.hi == 1
    enc = log2_enclosure(RatInterval.point(1), 20)
    assert enc.lo == enc.hi == 0
    enc = log2_enclosure(RatInterval.point(F(1, 8)), 20)
    assert enc.lo == enc.hi == -3


def test_log2_width_and_containment():
    enc = log2_enclosure(RatInterval.point(F(3, 2)), 30)
    assert enc.width <= F(1, 1 << 30) * 2
    assert float(enc.lo) <= math.log2(1.5) <= float(enc.hi)
    # golden ratio via a coarse decimal enclosure
    enc = log2_enclosure(RatInterval(F(161803, 100000), F(161804, 100000)), 20)
    assert float(enc.lo) <= 0.69424 <= float(enc.hi) + 1e-5


def test_log2_domain_error():
    with pytest.raises(ValueError):
        log2_enclosure(RatInterval(0, 1), 10)


def test_exp2_brackets_log2():
    # exp2 of the log2 endpoints must bracket the original value
    for q in (F(3, 2), F(7, 5), F(97, 13), F(1, 7)):
        if q < 1:
            continue
        enc = log2_enclosure(RatInterval.point(q), 30)
        s = exp2_enclosure(enc, 30)
        assert s.lo <= q <= s.hi


def test_exp2_exact_integers():
    s = exp2_enclosure(RatInterval.point(1), 24)
    assert s.lo == s.hi == 2
    s = exp2_enclosure(RatInterval.point(0), 24)
    assert s.lo == s.hi == 1


def test_simplest_rational():
    assert simplest_rational_in(F(14, 10), F(16, 10)) == F(3, 2)
    assert simplest_rational_in(F(1, 3), F(1, 3)) == F(1, 3)
    assert simplest_rational_in(F(-1, 2), F(1, 2)) == 0
    assert simplest_rational_in(F(5, 2), F(7, 2)) == 3
    s = simplest_rational_in(F(141421, 100000), F(141422, 100000))
    assert F(141421, 100000) <= s <= F(141422, 100000)
    for q in (F(3, 2), F(22, 7), F(355, 113)):
        assert simplest_rational_in(q - F(1, 10**9), q + F(1, 10**9)) == q


def test_interval_eval_point_consistency():
    # expression r/4 - 1/2 at r = 2 is exactly zero
    expr = critical_orbit_expr(1)
    assert expr.evaluate(RatInterval.point(2)) == RatInterval.point(0)
    # f_4^2(1/2): 1/2 -> 1 -> 0, as a plain iterate
    orbit = orbit_value_expr(F(4), 2)
    assert orbit.evaluate(RatInterval.point(F(1, 2))) == RatInterval.point(0)


def test_interval_eval_p2_straddles_zero():
    expr = critical_orbit_expr(2)
    enc = expr.evaluate(RatInterval(3, 4))
    assert enc.lo < 0 < enc.hi
    # hand endpoint values of f_r^2(1/2) - 1/2 = r^2/4 - r^3/16 - 1/2
    for r in (F(3), F(4)):
        val = r * r / 4 - r**3 / 16 - F(1, 2)
        assert enc.lo <= val <= enc.hi


@settings(max_examples=60, deadline=None)
@given(
    period=st.integers(1, 4),
    lo=st.fractions(min_value=0, max_value=4),
    w1=st.fractions(min_value=0, max_value=1),
    w2=st.fractions(min_value=0, max_value=1),
)
def test_inclusion_monotonicity(period, lo, w1, w2):
    expr = critical_orbit_expr(period)
    hi = min(F(4), lo + w1 + w2)
    outer = RatInterval(lo, hi)
    inner = RatInterval(min(lo + w1 / 2, hi), min(lo + w1 / 2 + w2 / 2, hi))
    big = expr.evaluate(outer)
    small = expr.evaluate(inner)
    assert big.lo <= small.lo and small.hi <= big.hi


@settings(max_examples=60, deadline=None)
@given(period=st.integers(1, 5), q=st.fractions(min_value=0, max_value=4))
def test_point_evaluation_matches_exact(period, q):
    expr = critical_orbit_expr(period)
    enc = expr.evaluate(RatInterval.point(q))
    assert enc.lo == enc.hi == expr.value_at(q)


def test_root_isolate_p1():
    iso = root_isolate(critical_orbit_expr(1), RatInterval(0, 4), F(1, 1000))
    assert len(iso.roots) == 1
    assert iso.roots[0] == RatInterval.point(2)
    assert not iso.unresolved


def test_root_isolate_p2():
    iso = root_isolate(critical_orbit_expr(2), RatInterval(0, 4), F(1, 10**6))
    assert len(iso.roots) == 2
    assert iso.roots[0] == RatInterval.point(2)
    second = iso.roots[1]
    # 1 + sqrt(5): check the defining quadratic changes sign over it
    assert second.lo < 1 + F(1118034, 500000) < second.hi + F(1, 10**5)
    assert (second.lo - 1) ** 2 <= 5 <= (second.hi - 1) ** 2


def test_root_isolate_p3_window():
    iso = root_isolate(
        critical_orbit_expr(3), RatInterval(F(38, 10), F(39, 10)), F(1, 10**5)
    )
    assert len(iso.roots) == 1
    root = iso.roots[0]
    assert F(38318, 10000) <= root.lo and root.hi <= F(38319, 10000)


def test_root_isolate_sign_change_soundness():
    expr = critical_orbit_expr(3)
    iso = root_isolate(expr, RatInterval(0, 4), F(1, 1 << 20))
    for root in iso.roots:
        if root.is_point:
            assert expr.sign_at(root.lo) == 0
        else:
            assert expr.sign_at(root.lo) * expr.sign_at(root.hi) < 0
    # pairwise disjoint
    for a, b in zip(iso.roots, iso.roots[1:]):
        assert a.hi < b.lo


def test_refine_root():
    expr = critical_orbit_expr(2)
    iso = root_isolate(expr, RatInterval(3, 4), F(1, 100))
    root = refine_root(expr, iso.roots[0], F(1, 10**9))
    assert root.width <= F(1, 10**9)
    assert expr.sign_at(root.lo) * expr.sign_at(root.hi) < 0


def test_state_expression_roots():
    # fixed points of f_2: 0 and 1/2
    expr = periodic_point_expr(F(2), 1)
    iso = root_isolate(expr, RatInterval(0, 1), F(1, 1 << 16))
    assert len(iso.roots) == 2
    assert iso.roots[0].contains(F(0))
    assert iso.roots[1].contains(F(1, 2))


def test_logistic_step_range_is_exact_image():
    r = RatInterval.point(F(7, 2))
    x = RatInterval(F(1, 4), F(3, 4))
    img = logistic_step_range(r, x)
    # max at the vertex, min at the endpoints (symmetric here)
    assert img.hi == F(7, 2) / 4
    assert img.lo == F(7, 2) * F(1, 4) * F(3, 4)
