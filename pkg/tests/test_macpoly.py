from fractions import Fraction as F

import pytest

from bakerakhiezer.errors import NonIntegerK
from bakerakhiezer.macpoly import macdonald_poly, scalar_product, singular_collisions
from bakerakhiezer.rootdata import build_root_datum


def test_backends_agree():
    d = build_root_datum("b", "A", 2, [1])
    lam = d.fundamental_weights[0]
    lam = tuple(2 * x for x in lam)
    p1 = macdonald_poly(d, 1, lam, "gram_schmidt")
    p2 = macdonald_poly(d, 1, lam, "eigen_solve")
    assert p1.monomial == p2.monomial


def test_orthogonal():
    d = build_root_datum("b", "A", 1, [1])
    w = d.fundamental_weights[0]
    ps = [macdonald_poly(d, 2, tuple(j * x for x in w)) for j in range(4)]
    z = ps[0].ops.const(0)
    for i in range(4):
        for j in range(i):
            assert scalar_product(d, 2, ps[i].monomial, ps[j].monomial, ps[0].ops) == z


def test_k0_gives_monomial_symmetric():
    d = build_root_datum("b", "A", 2, [1])
    lam = tuple(a + b for a, b in zip(*d.fundamental_weights))
    p = macdonald_poly(d, 0, lam)
    assert set(p.orbit) == {lam}


def test_rejects_noninteger_k():
    with pytest.raises(NonIntegerK):
        macdonald_poly(build_root_datum("b", "A", 1, [1]), F(1, 2), (F(0),))


def test_singular_collisions_a1():
    d = build_root_datum("b", "A", 1, [1])
    w = d.fundamental_weights[0]
    assert singular_collisions(d, tuple(2 * x for x in w)) == [(F(0),)]
    assert singular_collisions(d, tuple(3 * x for x in w)) == []
