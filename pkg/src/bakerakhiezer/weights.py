"""Weight functions: Delta, Delta', Q = Delta(x)Delta(-x), delta_0, delta, the constant C,
the polynomial weight at t = q^k and the lattice theta function."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import NonIntegerK, ToleranceUnreachable
from .exppoly import ExpPoly
from .rootdata import RootDatum, prec_set, vneg, vscale, vzero
from .scalars import Scalar

HALF = Fraction(1, 2)


class ScalarOps:
    """Coefficient factory producing Scalars with a fixed u = q^(1/U)."""

    def __init__(self, U: int, N: int = 1):
        self.U, self.N = U, N

    def qpow(self, r, coeff=1):
        s = Scalar.qpow(r, self.U, self.N)
        return s if coeff == 1 else s * Fraction(coeff)

    def const(self, c):
        return Scalar.from_fraction(c, self.U, self.N)


def _factor(datum, a, cm, cp, sign=-1):
    """cm * e^{a/2} + sign * cp * e^{-a/2}."""
    h = vscale(HALF, a)
    return ExpPoly({h: cm, vneg(h): cp if sign > 0 else -cp})


def _one(datum, ops):
    return ExpPoly.const(ops.const(1), datum.dim)


def delta_factors(datum: RootDatum, ops) -> list:
    """The two-term factors whose product is Delta(x)."""
    out = []
    if datum.case in ("a", "b"):
        for a in datum.positive_roots:
            qa = datum.qexp(a)
            for j in range(1, int(datum.m(a)) + 1):
                out.append(_factor(datum, a, ops.qpow(-j * qa / 2), ops.qpow(j * qa / 2)))
        return out
    m1, m2, m3, m4, m5 = datum.params
    n = datum.dim
    for i in range(n):
        e = tuple(Fraction(int(k == i)) for k in range(n))
        for s in prec_set(m1, m2):
            out.append(_factor(datum, e, ops.qpow(-s / 2), ops.qpow(s / 2)))
        for s in prec_set(m3, m4):
            out.append(_factor(datum, e, ops.qpow(-s / 2), ops.qpow(s / 2), sign=+1))
    for a in datum.positive_roots:
        if datum.is_long_c(a):
            continue
        for j in range(1, int(m5) + 1):
            out.append(_factor(datum, a, ops.qpow(-Fraction(j, 2)), ops.qpow(Fraction(j, 2))))
    return out


def delta(datum: RootDatum, ops) -> ExpPoly:
    """Delta(x) for integral m."""
    out = _one(datum, ops)
    for f in delta_factors(datum, ops):
        out = out * f
    return out


def delta0(datum: RootDatum, ops) -> ExpPoly:
    out = _one(datum, ops)
    for a in datum.positive_roots:
        out = out * _factor(datum, a, ops.const(1), ops.const(1))
    return out


def C_exponent(datum: RootDatum) -> Fraction:
    """C = q^e."""
    if datum.case in ("a", "b"):
        return sum((datum.qexp(a) * datum.m(a) * (datum.m(a) + 1) / 2 for a in datum.positive_roots), Fraction(0))
    m1, m2, m3, m4, m5 = datum.params
    n = datum.dim
    e = Fraction(0)
    for r in prec_set(m1, m2):
        for s in prec_set(m3, m4):
            e += n * (s + r)
    npos2 = sum(1 for a in datum.positive_roots if not datum.is_long_c(a))
    return e + npos2 * m5 * (m5 + 1) / 2


def to_lambda(f: ExpPoly, R):
    """sum c_nu e^nu (a function of lambda) -> RF in the Lambda variables of the ring R."""
    out = R.zero
    for nu, c in f.terms.items():
        out = out + R.coerce(c) * R.lam(nu)
    return out


@dataclass
class WeightBundle:
    datum: RootDatum
    delta: ExpPoly
    delta_dual: ExpPoly
    Qx: ExpPoly
    delta0: ExpPoly
    delta_weyl: ExpPoly
    C: object
    C_exp: Fraction
    wdel: ExpPoly
    rho: tuple
    rho_dual: tuple
    rho_tilde: tuple


def build_weights(datum: RootDatum, ops=None) -> WeightBundle:
    if ops is None:
        from .scalars import make_session
        ops = ScalarOps(make_session(datum).U)
    d = delta(datum, ops)
    dd = delta(datum.dual(), ops)
    dn = d.neg_x()
    d0 = delta0(datum, ops)
    Q = d * dn
    ce = C_exponent(datum)
    Cv = ops.qpow(ce)
    return WeightBundle(datum, d, dd, Q, d0, Q * d0, Cv, ce, (dn * d0).scale(Cv),
                        datum.rho, datum.dual().rho, datum.rho_tilde)


def nabla_polynomial(datum: RootDatum, k, ops) -> ExpPoly:
    """The weight at t = q^k (k_alpha positive integers), a Laurent polynomial.

    Cases a, b: ``k`` is an int or a pair (short, long).  Case c: five integers
    (k1..k5) measured from the base point t = (1, q^(1/2), -1, -q^(1/2), 1).
    """
    out = _one(datum, ops)
    if datum.case in ("a", "b"):
        if isinstance(k, (list, tuple)):
            ks = [Fraction(x) for x in k] if len(k) == 2 else [Fraction(k[0])] * 2
        else:
            ks = [Fraction(k)] * 2
        for x in ks:
            if x.denominator != 1 or x < 0:
                raise NonIntegerK(f"k={x} is not a nonnegative integer")
        for a in datum.roots:
            kk = int(ks[0] if datum.is_short(a) else ks[1])
            qa = datum.qexp(a)
            for i in range(kk):
                out = out * (ExpPoly.const(ops.const(1), datum.dim) + ExpPoly({a: -ops.qpow(i * qa)}))
        return out
    ks = [Fraction(x) for x in k]
    if len(ks) != 5 or any(x.denominator != 1 or x < 0 for x in ks):
        raise NonIntegerK("case c needs five nonnegative integers")
    base = [(1, 0), (1, HALF), (-1, 0), (-1, HALF)]
    n = datum.dim
    for i in range(n):
        e = tuple(Fraction(int(j == i)) for j in range(n))
        for sgn in (1, -1):
            ee = vscale(sgn, e)
            for (c0, p0), kk in zip(base, ks[:4]):
                for j in range(int(kk)):
                    out = out * (ExpPoly.const(ops.const(1), n) + ExpPoly({ee: ops.qpow(p0 + j) * (-c0)}))
    for a in datum.roots:
        if datum.is_long_c(a):
            continue
        for j in range(int(ks[4])):
            out = out * (ExpPoly.const(ops.const(1), n) + ExpPoly({a: -ops.qpow(j)}))
    return out


def m_from_k_c(k: Sequence) -> tuple:
    """Case c: the parameters m corresponding to nabla_polynomial's integers k."""
    k1, k2, k3, k4, k5 = (Fraction(x) for x in k)
    return (-k1, -k2 - HALF, -k3, -k4 - HALF, -k5)


# ---- theta function -----------------------------------------------------------

def omega_gram_min_eig(datum: RootDatum) -> float:
    fw = datum.fundamental_weights
    G = np.array([[float(datum.ip(a, b)) for b in fw] for a in fw])
    return float(np.linalg.eigvalsh(G).min()) * (1 - 1e-9)


def shell_count(r: int, k: int) -> int:
    return 1 if k == 0 else (2 * k + 1) ** r - (2 * k - 1) ** r


def gaussian_shell_tail(r: int, sigma: float, X: float, q0: float, K: int, scale: float = 1.0) -> float:
    """Upper bound for sum_{k > K} scale * shell_count(r,k) * q0^(sigma k^2/2 - X k)."""
    lq = -math.log(q0)
    total = 0.0
    k = K + 1
    prev = None
    while True:
        t = scale * shell_count(r, k) * math.exp(-lq * (sigma * k * k / 2 - X * k))
        if prev is not None and prev > 0 and t / prev < 0.5 and sigma * k > X:
            ratio = t / prev
            # successive ratios keep decreasing once past the maximum
            return total + t / (1 - ratio)
        total += t
        prev = t
        k += 1
        if k > K + 100000:
            return math.inf


def theta_numeric(datum: RootDatum, x, q0, tol: float = 1e-12, lattice="P", dps: int = 30):
    """theta(x) = sum_{gamma in P} q^{<gamma,x> + |gamma|^2/2} with a certified tail.

    Returns (value, tail_bound, radius).
    """
    if tol <= 0:
        raise ToleranceUnreachable("theta needs a positive tolerance")
    q0f = float(q0)
    if not 0 < q0f < 1:
        raise ValueError("theta_numeric needs 0 < q0 < 1")
    r = datum.rank
    fw = datum.fundamental_weights
    sigma = omega_gram_min_eig(datum)
    xr = [complex(c).real for c in x]
    X = sum(abs(float(datum.scale) * sum(a * float(b) for a, b in zip(xr, w))) for w in fw)
    K = 0
    while gaussian_shell_tail(r, sigma, X, q0f, K) > tol:
        K += 1
        if K > 400:
            raise ToleranceUnreachable("theta truncation radius exceeds 400")
    with mpmath.workdps(dps):
        lq = mpmath.log(mpmath.mpf(q0f) if isinstance(q0, float) else mpmath.mpmathify(q0))
        xs = [mpmath.mpmathify(complex(c)) for c in x]
        total = mpmath.mpc(0)
        from itertools import product
        for ks in product(range(-K, K + 1), repeat=r):
            g = vzero(datum.dim)
            for kk, w in zip(ks, fw):
                if kk:
                    g = tuple(a + kk * b for a, b in zip(g, w))
            pair = sum((xi * float(gi) for xi, gi in zip(xs, g)), mpmath.mpc(0)) * float(datum.scale)
            total += mpmath.exp(lq * (pair + float(datum.norm2(g)) / 2))
        return complex(total), gaussian_shell_tail(r, sigma, X, q0f, K), K
