from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polyrenorm.angles import Angle, angle_in_arc, reduce_offset, tuple_orbit


def test_parse_and_reduce():
    assert Angle.parse("1/3") == Angle(1, 3)
    assert Angle.parse("4/6") == Angle(2, 3)
    assert Angle.parse("0") == Angle(0, 1)
    assert Angle.parse("7/3") == Angle(1, 3)
    assert Angle(-1, 3) == Angle(2, 3)
    assert str(Angle(1, 3)) == "1/3"
    assert str(Angle(0, 5)) == "0"


def test_times_d():
    assert Angle(1, 3).times(3) == Angle(0, 1)
    assert Angle(1, 7).times(2) == Angle(2, 7)
    assert Angle(2, 3).times(3) == Angle(0, 1)


def test_tuple_orbit_examples():
    pre, per, orbit = tuple_orbit(Angle(1, 3), 3)
    assert (pre, per) == (1, 1)
    assert orbit == [Angle(1, 3), Angle(0, 1)]

    pre, per, _ = tuple_orbit(Angle(0, 1), 2)
    assert (pre, per) == (0, 1)

    pre, per, orbit = tuple_orbit(Angle(1, 7), 2)
    assert (pre, per) == (0, 3)
    assert orbit == [Angle(1, 7), Angle(2, 7), Angle(4, 7)]


@given(st.integers(0, 400), st.integers(1, 200), st.integers(2, 5))
def test_tuple_orbit_property(p, q, d):
    theta = Angle(p, q)
    pre, per, orbit = tuple_orbit(theta, d)
    assert pre + per == len(orbit)
    assert orbit[0] == theta
    for a, b in zip(orbit[:-1], orbit[1:]):
        assert a.times(d) == b
    # the first repetition closes onto index `pre`
    assert orbit[-1].times(d) == orbit[pre]


def test_reduce_offset():
    assert reduce_offset(0.3) == pytest.approx(0.3)
    assert reduce_offset(0.7) == pytest.approx(-0.3)
    assert reduce_offset(-0.2) == pytest.approx(-0.2)
    assert reduce_offset(0.5) == pytest.approx(0.5)
    assert reduce_offset(2.25) == pytest.approx(0.25)


def test_angle_in_arc():
    assert angle_in_arc(0.5, 1 / 3, 2 / 3)
    assert not angle_in_arc(0.0, 1 / 3, 2 / 3)
    assert not angle_in_arc(1 / 3, 1 / 3, 2 / 3)  # open arc
    assert angle_in_arc(0.9, 2 / 3, 1 / 3)  # wrapping arc
    assert not angle_in_arc(0.5, 1 / 3, 1 / 3)  # empty arc


def test_ccw_to():
    assert Angle(1, 3).ccw_to(Angle(2, 3)) == Fraction(1, 3)
    assert Angle(2, 3).ccw_to(Angle(1, 3)) == Fraction(2, 3)
    assert Angle(0, 1).ccw_to(Angle(0, 1)) == 0
