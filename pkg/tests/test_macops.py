from fractions import Fraction as F

from bakerakhiezer.exppoly import orbit_sum
from bakerakhiezer.identities import planted_non_quasi_invariant
from bakerakhiezer.macops import apply, build_macdonald_operator, is_quasi_invariant
from bakerakhiezer.rootdata import build_root_datum
from bakerakhiezer.scalars import make_session
from bakerakhiezer.weights import ScalarOps


def test_symmetric_functions_are_quasi_invariant():
    d = build_root_datum("b", "A", 2, [2])
    o = ScalarOps(make_session(d).U)
    f = orbit_sum(d, d.fundamental_weights[0], o.const(1))
    assert is_quasi_invariant(d, f, o)


def test_operator_preserves_symmetric_polynomials():
    d = build_root_datum("b", "A", 2, [1])
    o = ScalarOps(make_session(d).U)
    op = build_macdonald_operator(d, d.fundamental_weights[0], o)
    g = apply(op, orbit_sum(d, d.fundamental_weights[0], o.const(1)))
    assert hasattr(g, "terms") and g.terms
    for w in d.weyl_group:
        assert all(g.terms.get(d.act(w, k)) == v for k, v in g.terms.items())


def test_planted_violation_is_located():
    d = build_root_datum("b", "A", 2, [1])
    a = d.positive_roots[0]
    f, R = planted_non_quasi_invariant(d, a, 1)
    res = is_quasi_invariant(d, f, R, 1, R)
    assert not res.ok
    assert [(x["vector"], x["j"]) for x in res.failures] == [(a, 1)]
