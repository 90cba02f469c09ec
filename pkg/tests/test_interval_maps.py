import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrolab.numkit import PrecisionError, RatInterval, log2_enclosure
from entrolab.interval_maps import (
    NodeCapExceeded,
    PWLMap,
    QuadMap,
    compose,
    compose_iterate,
    constant_slope_map,
    entropy_via_variation,
    identity_map,
    slope_detect,
    staircase_map,
    tent_map,
    variation,
)

H_LOG32 = log2_enclosure(RatInterval.point(F(3, 2)), 30)


def test_pwlmap_validation():
    with pytest.raises(ValueError):
        PWLMap(((F(0), F(0)),))
    with pytest.raises(ValueError):
        PWLMap(((F(0), F(0)), (F(1, 2), F(2)), (F(1), F(0))))
    with pytest.raises(ValueError):
        PWLMap(((F(1, 10), F(0)), (F(1), F(1))))


def test_eval_identity_and_slope2():
    ident = identity_map()
    assert ident.eval(F(1, 3)) == F(1, 3)
    f = constant_slope_map(RatInterval.point(1))
    assert f.nodes == ((F(0), F(0)), (F(3, 8), F(3, 4)), (F(5, 8), F(1, 4)), (F(1), F(1)))
    assert f.eval(F(3, 8)) == F(3, 4)
    assert f.eval(1) == 1
    with pytest.raises(ValueError):
        f.eval(F(3, 2))


def test_compose_iterate_identity_and_once():
    ident = identity_map()
    assert compose_iterate(ident, 5).nodes == ident.nodes
    f = constant_slope_map(RatInterval.point(1))
    assert compose_iterate(f, 1) is f


def test_iterate_slopes_multiply():
    f = constant_slope_map(RatInterval.point(1))
    g = compose_iterate(f, 2)
    assert slope_detect(g) == 4


def test_variation_values():
    assert variation(identity_map()) == 1
    f = constant_slope_map(RatInterval.point(1))
    assert variation(f) == 2  # 3/4 + 1/2 + 3/4


def test_variation_power_law():
    f = constant_slope_map(RatInterval.point(1))
    for n in range(1, 11):
        assert variation(compose_iterate(f, n)) == F(2) ** n


def test_constant_slope_law_for_3_halves():
    f = constant_slope_map(H_LOG32)
    assert slope_detect(f) == F(3, 2)
    for n in range(1, 11):
        assert variation(compose_iterate(f, n)) == F(3, 2) ** n


def test_compose_exactness():
    f = constant_slope_map(H_LOG32)
    lhs = compose_iterate(f, 5)
    rhs = compose(compose_iterate(f, 2), compose_iterate(f, 3))
    assert lhs.nodes == rhs.nodes
    assert compose_iterate(compose_iterate(f, 2), 3).nodes == compose_iterate(f, 6).nodes


def test_node_cap():
    f = constant_slope_map(RatInterval.point(1))
    with pytest.raises(NodeCapExceeded):
        compose_iterate(f, 10, node_cap=100)


def test_entropy_via_variation_certified():
    e = entropy_via_variation(identity_map(), 4)
    assert e.certified and e.lo == e.hi == 0
    e = entropy_via_variation(constant_slope_map(RatInterval.point(1)), 1)
    assert e.certified and e.lo == e.hi == 1
    e = entropy_via_variation(constant_slope_map(H_LOG32), 1, bits=30)
    assert e.certified
    assert float(e.lo) <= math.log2(1.5) <= float(e.hi)


def test_entropy_power_law_constant_slope():
    f = constant_slope_map(H_LOG32)
    base = entropy_via_variation(f, 1, bits=40)
    for n in range(2, 7):
        g = compose_iterate(f, n)
        e = entropy_via_variation(g, 1, bits=40)
        scaled = RatInterval(base.lo * n, base.hi * n)
        assert scaled.intersects(RatInterval(e.lo, e.hi))


def test_realize_breakpoints_for_3_halves():
    f = constant_slope_map(H_LOG32)
    assert f.nodes == (
        (F(0), F(0)),
        (F(5, 12), F(5, 8)),
        (F(7, 12), F(3, 8)),
        (F(1), F(1)),
    )


def test_realize_degenerate_and_errors():
    assert constant_slope_map(RatInterval.point(0)).nodes == identity_map().nodes
    with pytest.raises(ValueError):
        constant_slope_map(RatInterval.point(F(3, 2)))
    with pytest.raises(PrecisionError):
        constant_slope_map(RatInterval(F(1, 4), F(3, 4)))


def test_realize_round_trip():
    for h in (F(1, 2), F(1, 3), F(9, 10)):
        f = constant_slope_map(RatInterval.point(h), bits=26)
        e = entropy_via_variation(f, 1, bits=30)
        assert e.certified
        widened = RatInterval(h - F(1, 1 << 24), h + F(1, 1 << 24))
        assert widened.intersects(RatInterval(e.lo, e.hi))


def test_staircase_shape_single_block():
    st1 = staircase_map([RatInterval.point(1)])
    # scaled copy of the slope-2 map on [0, 1/2]
    assert st1.eval(F(3, 16)) == F(3, 8)
    assert st1.eval(F(1, 2)) == F(1, 2)
    # identity tail
    assert st1.eval(F(3, 4)) == F(3, 4)


def test_staircase_block_independence():
    a = staircase_map([H_LOG32, RatInterval.point(1)])
    b = staircase_map([RatInterval.point(F(1, 2)), RatInterval.point(1)])
    # the largest target occupies [0, 1/2] in both; other blocks differ
    for x in (F(1, 16), F(3, 16), F(5, 16), F(111, 256)):
        assert a.eval(x) == b.eval(x)
    assert a.eval(F(9, 16)) != b.eval(F(9, 16))


def test_staircase_validation():
    with pytest.raises(ValueError):
        staircase_map([])
    with pytest.raises(ValueError):
        staircase_map([RatInterval.point(1), H_LOG32])  # decreasing
    with pytest.raises(ValueError):
        staircase_map([RatInterval.point(0)])


def test_staircase_estimates_climb_to_max():
    st3 = staircase_map([H_LOG32, H_LOG32, RatInterval.point(1)])
    prev = None
    for n in range(1, 7):
        e = entropy_via_variation(st3, n, bits=30)
        mid = (e.lo + e.hi) / 2
        if prev is not None:
            assert mid >= prev
        prev = mid
    assert F(85, 100) <= prev <= 1


def test_staircase_variation_lower_bound():
    # the top block alone forces V(f^n) >= (1/4) * 2^n
    st3 = staircase_map([H_LOG32, H_LOG32, RatInterval.point(1)])
    for n in range(1, 9):
        assert variation(compose_iterate(st3, n)) >= F(1, 4) * F(2) ** n


@settings(max_examples=30, deadline=None)
@given(x=st.fractions(min_value=0, max_value=1))
def test_tent_map_formula(x):
    t = tent_map()
    expected = 2 * x if x <= F(1, 2) else 2 - 2 * x
    assert t.eval(x) == expected


def test_quadmap():
    q = QuadMap(RatInterval.point(4))
    assert q.eval(F(1, 2)) == 1
    assert q.eval(1) == 0
    img = q.image_on(RatInterval(F(1, 4), F(3, 4)))
    assert img == RatInterval(F(3, 4), F(1))
    with pytest.raises(ValueError):
        QuadMap(RatInterval.point(5))
    j = q.to_json()
    assert QuadMap.from_json(j) == q
    qi = QuadMap(RatInterval(F(7, 2), F(15, 4)))
    assert not qi.is_exact
    with pytest.raises(ValueError):
        qi.eval(F(1, 2))


def test_pwl_json_round_trip():
    f = constant_slope_map(H_LOG32)
    assert PWLMap.from_json(f.to_json()).nodes == f.nodes
    data = f.to_json()
    assert data["nodes"][0] == ["0/1", "0/1"]


def test_image_on_exact():
    f = tent_map()
    assert f.image_on(RatInterval(F(1, 4), F(3, 4))) == RatInterval(F(1, 2), F(1))
    assert f.image_on(RatInterval(F(0), F(1))) == RatInterval(F(0), F(1))
