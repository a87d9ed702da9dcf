"""Macdonald (and Koornwinder) polynomials at t = q^k, k a nonnegative integer."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EigenvalueCollision, NonIntegerK, NotDefinedAtParameters
from .exppoly import ExpPoly, orbit_sum
from .macops import apply, build_koornwinder_operator, build_macdonald_operator
from .rootdata import RootDatum, build_root_datum, minuscule_and_quasiminuscule, vsub
from .scalars import make_session
from .weights import ScalarOps, m_from_k_c, nabla_polynomial


def _k_tuple(datum, k, allow_negative: bool = False) -> tuple:
    if datum.case == "c":
        ks = tuple(Fraction(x) for x in k)
        if len(ks) != 5:
            raise NonIntegerK("case c needs five integers k1..k5")
    elif isinstance(k, (list, tuple)):
        ks = tuple(Fraction(x) for x in k)
        ks = ks * 2 if len(ks) == 1 else ks
    else:
        ks = (Fraction(k),) * 2
    if any(x.denominator != 1 or (x < 0 and not allow_negative) for x in ks):
        raise NonIntegerK(f"k={k} must consist of nonnegative integers")
    return ks


def m_for_k(datum: RootDatum, k) -> tuple:
    """The one place where t = q^k is converted into the multiplicities m with t = q^{-m}."""
    ks = _k_tuple(datum, k, allow_negative=True)
    if datum.case == "c":
        return m_from_k_c(ks)
    return (-ks[0], -ks[1])


def k_datum(datum: RootDatum, k) -> RootDatum:
    """The same root system with m = -k (non-strict: negative m is allowed here)."""
    return build_root_datum(datum.case, datum.family, datum.rank, list(m_for_k(datum, k)),
                            scale=datum.scale, strict=False)


def default_ops(datum: RootDatum, k) -> ScalarOps:
    s = make_session(k_datum(datum, k))
    return ScalarOps(s.U)


def order_roots(datum: RootDatum) -> list:
    """Steps for the dominance order: positive roots, plus e_i in case c."""
    pos = list(datum.positive_roots)
    if datum.case == "c":
        n = datum.dim
        pos += [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    return pos


def dominant_below(datum: RootDatum, lam) -> list:
    """Dominant weights nu <= lam, ascending along a linear extension of dominance."""
    lam = tuple(Fraction(x) for x in lam)
    steps = order_roots(datum)
    seen = {lam}
    todo = [lam]
    while todo:
        v = todo.pop()
        for a in steps:
            w = vsub(v, a)
            if w not in seen and datum.is_dominant(w):
                seen.add(w)
                todo.append(w)
    h = tuple(sum(c) for c in zip(*datum.fundamental_weights))
    return sorted(seen, key=lambda v: (datum.ip(v, h), datum.sort_key(v)))


def is_below(datum: RootDatum, nu, lam) -> bool:
    """nu <= lam in the order generated by ``order_roots``."""
    return tuple(nu) in set(dominant_below(datum, lam))


def scalar_product(datum: RootDatum, k, f: ExpPoly, g: ExpPoly, ops=None):
    """CT[f(x) g(-x) nabla(x)] with nabla at t = q^k."""
    ops = ops or default_ops(datum, k)
    nab = nabla_polynomial(datum, _k_tuple(datum, k) if datum.case == "c" else k, ops)
    h = f * g.neg_x()
    out = ops.const(0)
    for nu, c in h.terms.items():
        w = nab.terms.get(tuple(-x for x in nu))
        if w is not None:
            out = out + c * w
    return out


@dataclass
class MacPolynomial:
    lam: tuple
    datum: RootDatum
    k: tuple
    orbit: dict
    monomial: ExpPoly
    backend: str
    ops: object = field(repr=False, default=None)

    def leading_coefficient(self):
        return self.orbit[self.lam]


def _from_orbit(datum, coeffs: dict, ops) -> ExpPoly:
    out = ExpPoly()
    for nu, c in coeffs.items():
        if c:
            out = out + orbit_sum(datum, nu, c)
    return out


def _operator(datum: RootDatum, k, ops, pi=None):
    kd = k_datum(datum, k)
    if kd.case == "c":
        return kd, build_koornwinder_operator(kd, ops)
    if pi is None:
        ow = minuscule_and_quasiminuscule(kd)
        pi = ow.minuscule[0] if ow.minuscule else ow.quasi_minuscule[0]
    return kd, build_macdonald_operator(kd, pi, ops)


def diagonal_coefficient(kd: RootDatum, op, lam, ops):
    """c_{lam lam} = m_pi(lam - rho) for the datum with m = -k."""
    v = vsub(tuple(lam), kd.rho)
    out = ops.const(0)
    for tau in kd.weyl_orbit(op.pi):
        out = out + ops.qpow(kd.ip(tau, v))
    return out


def operator_matrix(datum: RootDatum, k, lam, ops=None, pi=None) -> tuple:
    """(order, {mu: {nu: c_{mu nu}}}, op, kdatum): D m_mu = sum_nu c_{mu nu} m_nu for mu <= lam."""
    ops = ops or default_ops(datum, k)
    kd, op = _operator(datum, k, ops, pi)
    order = dominant_below(datum, lam)
    mat = {}
    for mu in order:
        img = apply(op, orbit_sum(datum, mu, ops.const(1)))
        mat[mu] = {nu: c for nu, c in img.terms.items() if datum.is_dominant(nu) and c}
    return order, mat, op, kd


def macdonald_poly(datum: RootDatum, k, lam, backend: str = "gram_schmidt", ops=None, pi=None) -> MacPolynomial:
    lam = tuple(Fraction(x) for x in lam)
    if not datum.is_dominant(lam):
        raise ValueError(f"{lam} is not dominant")
    ops = ops or default_ops(datum, k)
    kt = _k_tuple(datum, k, allow_negative=backend == "eigen_solve")
    if backend == "eigen_solve":
        try:
            return _eigen_solve(datum, k, lam, ops, pi)
        except EigenvalueCollision as e:
            if any(x < 0 for x in kt):
                # t = q^{-m}: no positive weight to fall back on
                raise NotDefinedAtParameters(str(e)) from e
            backend = "gram_schmidt"
    if backend != "gram_schmidt":
        raise ValueError(f"unknown backend {backend}")
    order = dominant_below(datum, lam)
    basis: dict = {}
    norms: dict = {}
    for nu in order:
        m_nu = orbit_sum(datum, nu, ops.const(1))
        coeffs = {nu: ops.const(1)}
        for mu in order:
            if mu == nu or mu not in basis or not is_below(datum, mu, nu):
                continue
            pm_c, pm = basis[mu]
            n2 = norms[mu]
            if not n2:
                raise NotDefinedAtParameters(f"<p_{mu}, p_{mu}> vanishes at k={k}")
            a = scalar_product(datum, k, m_nu, pm, ops) / n2
            for key, c in pm_c.items():
                coeffs[key] = coeffs.get(key, ops.const(0)) - a * c
        p = _from_orbit(datum, coeffs, ops)
        basis[nu] = (coeffs, p)
        norms[nu] = scalar_product(datum, k, p, p, ops)
    coeffs, p = basis[lam]
    return MacPolynomial(lam, datum, kt, {a: c for a, c in coeffs.items() if c}, p, "gram_schmidt", ops)


def _eigen_solve(datum, k, lam, ops, pi):
    order, mat, op, kd = operator_matrix(datum, k, lam, ops, pi)
    diag = {nu: diagonal_coefficient(kd, op, nu, ops) for nu in order}
    for nu in order:
        got = mat[nu].get(nu, ops.const(0))
        if not (got == diag[nu]):
            raise AssertionError(f"diagonal coefficient mismatch at {nu}")
    clam = diag[lam]
    a = {lam: ops.const(1)}
    for nu in reversed(order):
        if nu == lam:
            continue
        den = clam - diag[nu]
        if not den:
            raise EigenvalueCollision(f"c_lam,lam = c_nu,nu for lam={lam}, nu={nu}")
        s = ops.const(0)
        for mu, am in a.items():
            c = mat[mu].get(nu)
            if c is not None:
                s = s + am * c
        a[nu] = s / den
    p = _from_orbit(datum, a, ops)
    return MacPolynomial(lam, datum, _k_tuple(datum, k, True), {x: c for x, c in a.items() if c}, p, "eigen_solve", ops)


def singular_collisions(datum: RootDatum, lam, rho=None) -> list:
    """Dominant mu < lam with W(mu - rho) = W(lam - rho); p_lam at t = q^{-m} is well defined when empty."""
    lam = tuple(Fraction(x) for x in lam)
    rho = datum.rho if rho is None else rho
    orb = set(datum.weyl_orbit(vsub(lam, rho)))
    return [mu for mu in dominant_below(datum, lam) if mu != lam and vsub(mu, rho) in orb]
