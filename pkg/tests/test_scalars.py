from fractions import Fraction as F

import pytest

from bakerakhiezer.errors import DenominatorOverflow, DivideByZero
from bakerakhiezer.rootdata import build_root_datum
from bakerakhiezer.scalars import Scalar, make_session


def test_field_arithmetic():
    q = Scalar.qpow(1, 2)
    one = Scalar.from_fraction(1, 2)
    x = (one - q * q) / (one - q)
    assert x == one + q
    assert (x * x.inverse()) == one


def test_half_powers():
    h = Scalar.qpow(F(1, 2), 2)
    assert h * h == Scalar.qpow(1, 2)
    with pytest.raises(DenominatorOverflow):
        Scalar.qpow(F(1, 3), 2)


def test_cyclotomic_zeta():
    z = Scalar.zeta(1, 3)
    one = Scalar.from_fraction(1, 1, 3)
    assert z * z * z == one
    assert z * z + z + one == Scalar.from_fraction(0, 1, 3)


def test_zero_division():
    with pytest.raises(DivideByZero):
        Scalar.from_fraction(1) / Scalar.from_fraction(0)


def test_numeric_value():
    s = (Scalar.from_fraction(1, 2) - Scalar.qpow(1, 2)) / Scalar.qpow(F(1, 2), 2)
    assert abs(s.eval_numeric(0.25) - (1 - 0.25) / 0.5) < 1e-14


def test_session_and_ring():
    d = build_root_datum("b", "A", 2, [1])
    R = make_session(d).ring()
    L = R.lam(d.fundamental_weights[0])
    assert R.shift_lambda(L, d.fundamental_weights[0]) == L * R.qpow(d.norm2(d.fundamental_weights[0]))
    assert R.negate_lambda(R.negate_lambda(L + R.one)) == L + R.one
    assert R.invert_q(R.qpow(1)) == R.qpow(-1)
