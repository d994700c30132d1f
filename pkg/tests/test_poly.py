import math

import numpy as np
import pytest

from polyrenorm import (Polynomial, classify_multiplier, critical_points,
                        escape_time, find_cycles, green_potential)

from conftest import BASILICA, CUBIC, SQUARE


def test_polynomial_validation():
    with pytest.raises(ValueError):
        Polynomial((0, 1))  # degree 1
    with pytest.raises(ValueError):
        Polynomial((0, 0, 2))  # not monic
    with pytest.raises(ValueError):
        Polynomial((float("nan"), 0, 1))


def test_escape_radius_soundness():
    rng = np.random.default_rng(7)
    for P in (CUBIC, SQUARE, BASILICA):
        R = P.escape_radius
        phis = rng.uniform(0, 2 * np.pi, 1000)
        z = R * 1.01 * np.exp(1j * phis)
        assert (np.abs(P(z)) > np.abs(z)).all()


def test_monicity_sampled():
    rng = np.random.default_rng(11)
    z = rng.normal(size=10) + 1j * rng.normal(size=10)
    for P in (CUBIC, BASILICA):
        lower = np.zeros_like(z)
        for c in reversed(P.coeffs[:-1]):
            lower = lower * z + c
        assert np.abs(P(z) - z ** P.degree - lower).max() < 1e-12


def test_escape_time_examples():
    esc = escape_time(SQUARE, 0j, 100)
    assert esc == (False, 100, 0j)

    esc = escape_time(SQUARE, 3 + 0j, 100)
    assert esc.escaped and esc.steps == 1 and esc.final == 9 + 0j

    esc = escape_time(CUBIC, -1 + 0j, 64)
    assert not esc.escaped
    assert esc.final == -1 + 0j  # fixed point: P(-1) = -1
    assert CUBIC(-1 + 0j) == -1 + 0j


def test_critical_points():
    assert critical_points(SQUARE) == [0j]

    crit = critical_points(CUBIC)
    assert len(crit) == 2
    assert abs(crit[0] - (-2)) < 1e-9
    assert abs(crit[1] - (-2 / 3)) < 1e-9

    crit3 = critical_points(Polynomial((0, 0, 0, 1)))  # z^3, double root
    assert len(crit3) == 2
    assert all(abs(c) < 1e-8 for c in crit3)


def test_fixed_points_square():
    cyc = find_cycles(SQUARE, 1)
    pts = sorted((c.points[0] for c in cyc), key=lambda z: z.real)
    assert abs(pts[0]) < 1e-12 and abs(pts[1] - 1) < 1e-12
    kinds = {round(c.points[0].real): (c.multiplier, c.kind) for c in cyc}
    assert abs(kinds[0][0]) < 1e-12 and kinds[0][1] == "attracting"
    assert abs(kinds[1][0] - 2) < 1e-12 and kinds[1][1] == "repelling"


def test_fixed_points_cubic():
    cyc = find_cycles(CUBIC, 1)
    assert len(cyc) == 3
    got = sorted(((c.points[0], c.multiplier) for c in cyc), key=lambda t: t[0].real)
    expected = [(-3, 7), (-1, -1), (0, 4)]  # roots of z(z+1)(z+3)
    for (z, lam), (ze, le) in zip(got, expected):
        assert abs(z - ze) < 1e-9
        assert abs(lam - le) < 1e-9


def test_fixed_points_basilica():
    cyc = find_cycles(BASILICA, 1)
    got = {round(c.points[0].real): c for c in cyc}
    assert abs(got[0].multiplier + 1) < 1e-9 and got[0].kind == "parabolic"
    assert abs(got[2].multiplier - 3) < 1e-9 and got[2].kind == "repelling"


def test_cycle_residuals_and_multipliers():
    for P in (CUBIC, BASILICA):
        for cyc in find_cycles(P, 3):
            z0 = cyc.points[0]
            zn = P.iterate(z0, cyc.period)
            assert abs(zn - z0) < 1e-9
            prod = 1.0 + 0j
            for p in cyc.points:
                prod *= P.deriv(p)
            assert abs(prod - cyc.multiplier) < 1e-9


def test_classify_multiplier():
    assert classify_multiplier(0.5 + 0j) == "attracting"
    assert classify_multiplier(2 + 0j) == "repelling"
    assert classify_multiplier(-1 + 0j) == "parabolic"
    assert classify_multiplier(np.exp(2j * np.pi / 7)) == "parabolic"
    golden = np.exp(2j * np.pi * (np.sqrt(5) - 1) / 2)
    assert classify_multiplier(golden) == "neutral-irrational"


def test_green_potential_square():
    assert abs(green_potential(SQUARE, math.e + 0j) - 1.0) < 1e-12
    assert green_potential(SQUARE, 1j) == 0.0  # |z| = 1 exactly in floats
    # a generic circle point is on the boundary only to rounding accuracy
    assert green_potential(SQUARE, np.exp(1j * 0.7)) < 1e-12


def test_green_potential_high_precision_oracle():
    import mpmath
    mpmath.mp.prec = 200
    z = mpmath.mpc(10, 0)
    for n in range(1, 60):
        z = z * (z + 2) ** 2
        if abs(z) > mpmath.mpf(10) ** 40:
            break
    oracle = float(mpmath.log(abs(z)) / mpmath.mpf(3) ** n)
    assert abs(green_potential(CUBIC, 10 + 0j) - oracle) < 1e-10


def test_green_functional_equation():
    rng = np.random.default_rng(3)
    for _ in range(40):
        z = complex(rng.uniform(-4, 2), rng.uniform(-3, 3))
        g = green_potential(CUBIC, z)
        if g == 0.0:
            continue
        assert abs(green_potential(CUBIC, CUBIC(z)) - 3 * g) < 1e-9
