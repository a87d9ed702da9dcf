from fractions import Fraction as F

import pytest

from bakerakhiezer.rootdata import build_root_datum
from bakerakhiezer.scalars import make_session
from bakerakhiezer.weights import C_exponent, ScalarOps, delta, nabla_polynomial, theta_numeric


def ops(d):
    return ScalarOps(make_session(d).U)


def test_delta_a1():
    d = build_root_datum("b", "A", 1, [1])
    o = ops(d)
    D = delta(d, o)
    # (q^{-1/2} e^{a/2} - q^{1/2} e^{-a/2})
    assert len(D.terms) == 2
    a = d.positive_roots[0]
    assert C_exponent(d) == d.qexp(a)


def test_delta_m0_is_one():
    d = build_root_datum("b", "A", 2, [0])
    assert len(delta(d, ops(d)).terms) == 1


def test_nabla_k1_constant_term():
    # t = q: nabla = prod (1 - e^a), CT = |W|
    d = build_root_datum("b", "A", 2, [1])
    nab = nabla_polynomial(d, 1, ops(d))
    assert nab.constant_term() == ops(d).const(6)


def test_theta_symmetry():
    d = build_root_datum("b", "A", 1, [1])
    v, tail, K = theta_numeric(d, (0.1,), 0.5, tol=1e-12)
    w, _, _ = theta_numeric(d, (-0.1,), 0.5, tol=1e-12)
    assert abs(v - w) < 1e-12 and tail < 1e-12
