"""Macdonald and Koornwinder difference operators, their exact application, and
quasi-invariance testing."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NotDivisible, NotQuasiMinuscule, WrongCase
from .exppoly import ExpPoly, divide_by_binomial, shift
from .rootdata import RootDatum, is_minuscule, minuscule_and_quasiminuscule, prec_set, vneg, vscale, vzero

HALF = Fraction(1, 2)

# A binomial key (beta, s, r) stands for 1 - s q^r e^beta with s = +1 or -1.


def _regular(datum: RootDatum):
    v = vzero(datum.dim)
    for w in datum.fundamental_weights:
        v = tuple(a + b for a, b in zip(v, w))
    return v


def _canonical(datum, key):
    """Rewrite 1 - s q^r e^beta with beta 'positive'. Returns (key', sign, qexp, xmono)."""
    beta, s, r = key
    if datum.ip(beta, _regular(datum)) > 0:
        return key, 1, Fraction(0), vzero(datum.dim)
    # 1 - s q^r e^b = -s q^r e^b (1 - s q^{-r} e^{-b})
    return (vneg(beta), s, -r), -s, r, beta


def binomial_poly(key, ops, dim) -> ExpPoly:
    beta, s, r = key
    return ExpPoly({(Fraction(0),) * dim: ops.const(1)}) + ExpPoly({beta: ops.qpow(r) * (-s)})


@dataclass
class OpTerm:
    shift: tuple
    coef: object
    xmono: tuple
    num: tuple
    den: tuple


@dataclass
class DiffOperator:
    datum: RootDatum
    terms: list
    a0: object = None
    pi: tuple = None
    kind: str = "minuscule"
    ops: object = field(default=None, repr=False)

    def shifts(self):
        return sorted({t.shift for t in self.terms})


@dataclass
class ExpFunction:
    """q^{<lam_scale*lambda + sigma, x>} * body(x), lambda formal."""
    sigma: tuple
    body: ExpPoly
    lam_scale: Fraction = Fraction(1)


@dataclass
class Flagged:
    """A non-polynomial result: numerator / prod of binomials in ``den``."""
    sigma: tuple
    numerator: ExpPoly
    den: list
    failed_at: tuple = None


def _make_term(datum, ops, tau, coef, num, den):
    xmono = vzero(datum.dim)
    cden = []
    for key in den:
        k2, sgn, qe, xm = _canonical(datum, key)
        cden.append(k2)
        if sgn != 1 or qe:
            # 1/(sgn q^qe e^xm * B) = sgn q^{-qe} e^{-xm} / B
            coef = coef * ops.qpow(-qe) * sgn
            xmono = tuple(a - b for a, b in zip(xmono, xm))
    return OpTerm(tuple(tau), coef, xmono, tuple(num), tuple(cden))


def _ab_factors(datum, tau):
    """Numerator/denominator binomials and the t^{-1/2} exponent for a_tau (cases a, b)."""
    num, den = [], []
    qe = Fraction(0)
    for a in datum.roots:
        ma = datum.m(a)
        qa = datum.qexp(a)
        # t_a = q_a^{-m}
        if datum.ip(a, tau) > 0:
            num.append((a, 1, -ma * qa))
            den.append((a, 1, Fraction(0)))
            qe += ma * qa / 2  # 1/t^{1/2} = q_a^{m/2}
        ap = datum.alpha_prime(a)
        if datum.ip(datum.coroot(ap), tau) == 2:
            num.append((a, 1, -ma * qa + qa))
            den.append((a, 1, qa))
            qe += ma * qa / 2
    return num, den, qe


def build_macdonald_operator(datum: RootDatum, pi, ops) -> DiffOperator:
    """D^pi for (quasi-)minuscule pi in P(R'), cases a, b."""
    if datum.case == "c":
        raise WrongCase("use build_koornwinder_operator in case c")
    pi = tuple(Fraction(x) for x in pi)
    ow = minuscule_and_quasiminuscule(datum)
    dom = datum.dominant_conjugate(pi)
    minus = is_minuscule(datum, pi)
    if dom not in ow.minuscule and dom not in ow.quasi_minuscule:
        raise NotQuasiMinuscule(f"{pi} is neither minuscule nor quasi-minuscule in P(R')")
    orbit = datum.weyl_orbit(pi)
    terms = []
    for tau in orbit:
        num, den, qe = _ab_factors(datum, tau)
        coef = ops.qpow(qe)
        terms.append(_make_term(datum, ops, tau, coef, num, den))
        if not minus:
            terms.append(_make_term(datum, ops, vzero(datum.dim), -coef, num, den))
    a0 = None
    if not minus:
        a0 = ops.const(0)
        for tau in orbit:
            a0 = a0 + ops.qpow(-datum.ip(datum.rho, tau))
    return DiffOperator(datum, terms, a0, pi, "minuscule" if minus else "quasi-minuscule", ops)


def koornwinder_v_factors(datum, tau):
    """Pieces of v(<tau, x>): numerator keys, denominator keys and the q-exponent of the prefactor."""
    m1, m2, m3, m4, m5 = datum.params
    tsigns = [(1, -m1), (1, -m2), (-1, -m3), (-1, -m4)]
    num = [(tuple(tau), s, r) for s, r in tsigns]
    two = vscale(2, tau)
    den = [(two, 1, Fraction(0)), (two, 1, Fraction(1))]
    # (q / (t1 t2 t3 t4))^{1/2} = q^{(1 + m1 + m2 + m3 + m4)/2}
    qe = (1 + m1 + m2 + m3 + m4) / 2
    return num, den, qe


def build_koornwinder_operator(datum: RootDatum, ops) -> DiffOperator:
    if datum.case != "c":
        raise WrongCase("the Koornwinder operator needs case c")
    n = datum.dim
    pi = tuple(Fraction(int(i == 0)) for i in range(n))
    orbit = datum.weyl_orbit(pi)
    m5 = datum.params[4]
    terms = []
    for tau in orbit:
        num, den, qe = koornwinder_v_factors(datum, tau)
        for a in datum.roots:
            if datum.is_long_c(a) or datum.ip(a, tau) <= 0:
                continue
            num.append((a, 1, -m5))
            den.append((a, 1, Fraction(0)))
            qe += m5 / 2
        coef = ops.qpow(qe)
        terms.append(_make_term(datum, ops, tau, coef, num, den))
        terms.append(_make_term(datum, ops, vzero(n), -coef, num, den))
    a0 = ops.const(0)
    for tau in orbit:
        a0 = a0 + ops.qpow(-datum.ip(datum.rho, tau))
    return DiffOperator(datum, terms, a0, pi, "koornwinder", ops)


def default_operator(datum: RootDatum, ops) -> DiffOperator:
    if datum.case == "c":
        return build_koornwinder_operator(datum, ops)
    ow = minuscule_and_quasiminuscule(datum)
    pi = ow.minuscule[0] if ow.minuscule else ow.quasi_minuscule[0]
    return build_macdonald_operator(datum, pi, ops)


def eigenvalue(op: DiffOperator, R, nu=None, scale=Fraction(1)):
    """m_pi(lambda + nu) = sum_{tau in W pi} q^{<tau, nu>} Lambda^{tau} as an RF."""
    d = op.datum
    nu = vzero(d.dim) if nu is None else nu
    out = R.zero
    for tau in d.weyl_orbit(op.pi):
        out = out + R.lam(vscale(scale, tau), d.ip(tau, nu))
    return out


def apply(op: DiffOperator, f, R=None):
    """Apply the operator exactly.  ``f`` is an ExpFunction (formal lambda) or an ExpPoly.

    Returns an ExpFunction/ExpPoly, or a Flagged object when a binomial denominator survives.
    """
    d = op.datum
    ops = op.ops
    dim = d.dim
    is_fun = isinstance(f, ExpFunction)
    body = f.body if is_fun else f
    sigma = f.sigma if is_fun else vzero(dim)
    ls = f.lam_scale if is_fun else Fraction(1)
    qp = ops.qpow
    # common denominator
    B: dict = {}
    for t in op.terms:
        cnt: dict = {}
        for k in t.den:
            cnt[k] = cnt.get(k, 0) + 1
        for k, c in cnt.items():
            B[k] = max(B.get(k, 0), c)
    Bpolys = {k: binomial_poly(k, ops, dim) for k in B}
    total = ExpPoly()
    cache_shift = {}
    for t in op.terms:
        if t.shift not in cache_shift:
            s = shift(body, t.shift, d.ip, qp)
            if is_fun and any(t.shift):
                s = s.scale(R.lam(vscale(ls, t.shift), d.ip(sigma, t.shift)))
            cache_shift[t.shift] = s
        g = cache_shift[t.shift].scale(t.coef)
        if any(t.xmono):
            g = g.translate(t.xmono)
        for k in t.num:
            g = g * binomial_poly(k, ops, dim)
        rem = dict(B)
        for k in t.den:
            rem[k] -= 1
        for k, c in rem.items():
            for _ in range(c):
                g = g * Bpolys[k]
        total = total + g
    if op.a0 is not None:
        g = body.scale(op.a0)
        for k, c in B.items():
            for _ in range(c):
                g = g * Bpolys[k]
        total = total + g
    remaining = [k for k, c in sorted(B.items(), key=lambda kv: repr(kv[0])) for _ in range(c)]
    while remaining:
        k = remaining[0]
        beta, s, r = k
        try:
            total = divide_by_binomial(total, beta, qp(-r) * s, d.ip)
        except NotDivisible as e:
            return Flagged(sigma, total, remaining, e.residue_class)
        total = total.scale(qp(-r) * (-s))
        remaining.pop(0)
    if is_fun:
        return ExpFunction(sigma, total, ls)
    return total


# ---- quasi-invariance --------------------------------------------------------

@dataclass
class QIResult:
    ok: bool
    failures: list

    def __bool__(self):
        return self.ok


def quasi_conditions(datum: RootDatum, ell: int = 1) -> list:
    """List of (label, tau, kappa, beta, c): T^{-tau}f - e^{kappa} T^{tau}f must be divisible by e^beta - c."""
    out = []
    n = datum.dim
    for a in datum.positive_roots:
        if datum.case == "c" and datum.is_long_c(a):
            continue
        ap = datum.alpha_prime(a)
        for j in range(1, int(datum.m(a)) + 1):
            tau = vscale(Fraction(j, 2), ap)
            kappa = vscale(Fraction(j, ell), ap) if ell > 1 else vzero(n)
            out.append((("root", a, j), tau, kappa, a, 1))
    if datum.case == "c":
        m1, m2, m3, m4, _ = datum.params
        for i in range(n):
            e = tuple(Fraction(int(k == i)) for k in range(n))
            for s in prec_set(m1, m2):
                kappa = vscale(2 * s / ell, e) if ell > 1 else vzero(n)
                out.append((("e+", e, s), vscale(s, e), kappa, e, 1))
            for s in prec_set(m3, m4):
                kappa = vscale(2 * s / ell, e) if ell > 1 else vzero(n)
                out.append((("e-", e, s), vscale(s, e), kappa, e, -1))
    return out


def is_quasi_invariant(datum: RootDatum, f, ops, ell: int = 1, R=None) -> QIResult:
    """Check the quasi-invariance conditions (twisted when ell > 1) of f.

    ``f`` is an ExpPoly or an ExpFunction with formal lambda (then ``R`` is the RF ring).
    """
    is_fun = isinstance(f, ExpFunction)
    body = f.body if is_fun else f
    sigma = f.sigma if is_fun else vzero(datum.dim)
    ls = f.lam_scale if is_fun else Fraction(1)
    fails = []
    for label, tau, kappa, beta, c in quasi_conditions(datum, ell):
        minus = shift(body, vneg(tau), datum.ip, ops.qpow)
        plus = shift(body, tau, datum.ip, ops.qpow)
        if is_fun:
            minus = minus.scale(R.lam(vscale(-ls, tau), -datum.ip(sigma, tau)))
            plus = plus.scale(R.lam(vscale(ls, tau), datum.ip(sigma, tau)))
        G = minus - plus.translate(kappa)
        try:
            divide_by_binomial(G.translate(sigma), beta, c, datum.ip)
        except NotDivisible as e:
            fails.append({"condition": label[0], "vector": label[1], "j": label[2], "residue_class": e.residue_class})
    return QIResult(not fails, fails)
