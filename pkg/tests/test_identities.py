from fractions import Fraction as F

import pytest

import bakerakhiezer.identities as I
from bakerakhiezer.errors import NotDefinedAtParameters, ToleranceUnreachable
from bakerakhiezer.rootdata import build_root_datum


@pytest.mark.parametrize("m", [1, 2])
def test_eigen_and_symmetries(psi_a1, m):
    ba = psi_a1[m]
    assert all(I.verify_eigen(ba, pi).passed for pi in I.operator_weights(ba.datum))
    for f in (I.verify_duality, I.verify_symmetries, I.verify_evaluation, I.verify_small_invariance):
        assert f(ba).passed, f.__name__


def test_orthogonality_a1(psi_a1):
    ba = psi_a1[2]
    for lam, mu in I.orthogonality_grid(ba.datum, 4):
        assert I.verify_orthogonality(ba, lam, mu).passed


def test_norm_a2(a2):
    r = I.verify_norm_identity(a2, a2.fundamental_weights[1])
    assert r.passed and r.details["literal_sign_matches"] is False


def test_weyl_both_signs(psi_a1):
    ba = psi_a1[1]
    w = ba.datum.fundamental_weights[0]
    assert I.verify_weyl_formula(ba, w, -1).passed
    assert I.verify_weyl_formula(ba, sign=+1, index=tuple(3 * x for x in w)).passed
    with pytest.raises(NotDefinedAtParameters) as e:
        I.verify_weyl_formula(ba, sign=+1, index=tuple(2 * x for x in w))
    assert e.value.collisions


def test_weyl_character():
    d = build_root_datum("b", "B", 2, [0, 0])
    assert I.verify_weyl_character(d, d.fundamental_weights[0]).passed


def test_cmm_a1(psi_a1):
    ba = psi_a1[1]
    r = I.verify_cmm_integral(ba, (F(1, 3),), (F(-2, 5),))
    assert r.passed and r.rel_err < 1e-9
    with pytest.raises(ToleranceUnreachable):
        I.verify_cmm_integral(ba, (F(1, 3),), (F(-2, 5),), tol=0)


def test_qmm_k_exact(a1):
    assert I.verify_qmm(a1[1], "k").passed


def test_summation_a1(psi_a1):
    ba = psi_a1[1]
    xi = I.generic_xi(ba.datum, 1)[0]
    assert I.verify_summation(ba, (F(1, 3),), (F(-2, 5),), xi).passed


def test_corruption_detected(psi_a1):
    bad = I.corrupt(psi_a1[2])
    assert not I.verify_eigen(bad, bad.datum.fundamental_weights[0]).passed


def test_twisted_a1():
    d = build_root_datum("b", "A", 1, [1])
    tw, rep = I.verify_twisted_existence(d, 2)
    assert rep.passed
    assert I.verify_twisted_self_duality(tw).passed
    assert I.verify_ell_one_degeneration(d).passed
    assert I.verify_gaussian_gain(d, 2).passed


def test_twisted_operator_a1():
    d = build_root_datum("b", "A", 1, [1])
    tw, _ = I.verify_twisted_existence(d, 2)
    op, rep = I.discover_twisted_operator(tw, d.fundamental_weights[0])
    assert rep.passed
    assert I.verify_operator_eigen(op, tw).passed
