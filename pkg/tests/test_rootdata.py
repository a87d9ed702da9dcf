from fractions import Fraction as F

import pytest

from bakerakhiezer.errors import IntegralityViolation
from bakerakhiezer.rootdata import (build_root_datum, dual_parameters_c, ell_admissible, in_zonotope,
                                   minuscule_and_quasiminuscule, prec_set, support_set)


@pytest.mark.parametrize("fam,rank,npos,order", [("A", 1, 1, 2), ("A", 2, 3, 6), ("B", 2, 4, 8),
                                                 ("C", 3, 9, 48), ("D", 4, 12, 192), ("G", 2, 6, 12)])
def test_root_counts(fam, rank, npos, order):
    d = build_root_datum("b", fam, rank, [1])
    assert len(d.positive_roots) == npos
    assert len(d.weyl_group) == order


def test_rho_is_half_sum_weighted():
    d = build_root_datum("b", "B", 2, [1, 2])
    want = [F(0)] * d.dim
    for a in d.positive_roots:
        want = [x + d.m(a) * y / 2 for x, y in zip(want, a)]
    assert list(d.rho) == want


def test_case_a_dual_swaps_lengths():
    d = build_root_datum("a", "B", 2, [1, 2])
    dd = d.dual()
    assert {dd.norm2(a) for a in dd.roots} == {d.norm2(d.coroot(a)) for a in d.roots}
    assert dd.dual().roots == d.roots


def test_case_c_dual_parameters_involutive():
    m = (F(1, 2), 0, F(1, 2), 0, 1)
    assert dual_parameters_c(dual_parameters_c(m)) == tuple(F(x) for x in m)


def test_case_c_integrality():
    with pytest.raises(IntegralityViolation):
        build_root_datum("c", "C", 2, [F(1, 2)] * 4 + [1])
    build_root_datum("c", "C", 2, [F(1, 2), 0, F(1, 2), 0, 1])


def test_prec_set():
    assert prec_set(F(5, 2), 0) == [F(1, 2), F(3, 2), F(5, 2)]
    assert prec_set(0, 0) == []


def test_a1_support_rank_one():
    d = build_root_datum("b", "A", 1, [3])
    sup = support_set(d, 1, refine_Q=True)
    assert [d.wcoords(v)[0] for v in sup] == sorted([F(k) for k in (3, 1, -1, -3)], reverse=True) or \
        sorted(d.wcoords(v)[0] for v in sup) == [F(k) for k in (-3, -1, 1, 3)]


def test_zonotope_vertices_contain_rho():
    d = build_root_datum("b", "A", 2, [2])
    assert in_zonotope(d, d.rho)
    assert not in_zonotope(d, tuple(2 * x for x in d.rho))


def test_minuscule():
    ow = minuscule_and_quasiminuscule(build_root_datum("b", "A", 2, [1]))
    assert len(ow.minuscule) == 2
    ow = minuscule_and_quasiminuscule(build_root_datum("b", "G", 2, [1]))
    assert not ow.minuscule and len(ow.quasi_minuscule) == 1


def test_ell_admissible():
    b2 = build_root_datum("a", "B", 2, [1, 1])
    g2 = build_root_datum("a", "G", 2, [1, 1])
    assert [l for l in range(1, 7) if ell_admissible(b2.dual(), l)] == [2, 4, 6]
    assert [l for l in range(1, 7) if ell_admissible(g2.dual(), l)] == [3, 6]
    c = build_root_datum("c", "C", 1, [F(1, 2), 0, F(1, 2), 0, 0])
    assert not ell_admissible(c, 1) and ell_admissible(c, 2)
    assert all(ell_admissible(build_root_datum("b", "A", 2, [1]), l) for l in range(1, 5))


def test_case_c_dual_nonstrict():
    h = F(1, 2)
    d = build_root_datum("c", "C", 2, [h, h, h, h, 1], strict=False)
    assert d.dual().params == (F(3, 2), -h, -h, -h, F(1))
