from fractions import Fraction as F

import pytest

from bakerakhiezer.errors import NotDivisible
from bakerakhiezer.exppoly import ExpPoly, binomial, divide_by_binomial, orbit_sum, vanishes_on_subvariety
from bakerakhiezer.rootdata import build_root_datum


def ip(a, b):
    return sum(x * y for x, y in zip(a, b))


def test_ring_ops():
    f = ExpPoly.mono((1,), 2) + ExpPoly.mono((-1,), 3)
    g = f * f.neg_x()
    assert g.constant_term() == 2 * 2 + 3 * 3
    assert (f - f).terms == {}


def test_division_by_binomial_roundtrip():
    b = binomial((F(1),), 1, 1)
    g = ExpPoly.mono((F(2),), 5) + ExpPoly.mono((F(-1, 2),), 7)
    f = b * g
    assert divide_by_binomial(f, (F(1),), 1, ip) == g
    with pytest.raises(NotDivisible):
        divide_by_binomial(f + ExpPoly.mono((F(0),), 1), (F(1),), 1, ip)


def test_sign_binomial():
    f = binomial((F(1),), -1, 1) * ExpPoly.mono((F(3),), 1)
    assert vanishes_on_subvariety(f, (F(1),), -1, ip)
    assert not vanishes_on_subvariety(f, (F(1),), 1, ip)


def test_orbit_sum_size():
    d = build_root_datum("b", "A", 2, [1])
    assert len(orbit_sum(d, d.fundamental_weights[0]).terms) == 3
    assert len(orbit_sum(d, d.rho).terms) == 6
