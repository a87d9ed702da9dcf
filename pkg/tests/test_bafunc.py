from fractions import Fraction as F

import pytest

from bakerakhiezer.bafunc import (construct_ba_iterative, construct_ba_linear, evaluate, from_json,
                                  rank_one_closed_form, specialize_lambda, to_json)
from bakerakhiezer.errors import EllNotAdmissible, PoleAtLambda
from bakerakhiezer.rootdata import build_root_datum


@pytest.mark.parametrize("m", [1, 2, 3])
def test_closed_form_oracle(psi_a1, m):
    assert psi_a1[m] == rank_one_closed_form(m)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_iterative_equals_linear(psi_a1, a1, m):
    assert construct_ba_iterative(a1[m]) == psi_a1[m]


def test_m0_is_plane_wave(psi_a1):
    # psi = Delta'(lambda) q^<lambda, x> = 1 at m = 0
    assert psi_a1[0].nonzero_support() == [(F(0),)]


def test_support_parity(psi_a1):
    for m in (1, 2, 3):
        ks = sorted(nu[0] for nu in psi_a1[m].nonzero_support())
        assert ks == sorted(psi_a1[m].datum.rho[0] - j * psi_a1[m].datum.positive_roots[0][0]
                            for j in range(m + 1))


def test_json_roundtrip(psi_a2, a2):
    assert from_json(to_json(psi_a2), a2) == psi_a2


def test_evaluation_exact_vs_numeric(psi_a1):
    ba = psi_a1[1]
    ex = evaluate(ba, (F(1, 3),), (F(1, 5),))
    nu = evaluate(ba, (F(1, 3),), (F(1, 5),), mode="numeric", q0=0.3)
    assert abs(ex.eval_numeric(0.3) - nu) < 1e-12


def test_pole_reported(psi_a1):
    # the raw coefficients have poles at lambda = 1, 2; normalizing by Delta'(lambda) clears them
    raw = rank_one_closed_form(2, normalized=False)
    for x in (F(1), F(2)):
        specialize_lambda(psi_a1[2], (x,))
        with pytest.raises(PoleAtLambda):
            specialize_lambda(raw, (x,))
    specialize_lambda(raw, (F(3),))


def test_ell_admissibility_enforced(c1):
    with pytest.raises(EllNotAdmissible):
        construct_ba_linear(c1, 3)
