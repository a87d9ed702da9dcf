"""Exact coefficient arithmetic.

Two coefficient types live here:

* ``Scalar``: a rational function of one formal variable u = q^(1/U) whose
  coefficients lie in the cyclotomic field Q(zeta_N).  Used for concrete values.
* ``RF``: a rational function over Q of u and of the lambda-variables
  L_i = q^(<w'_i, lambda>/dL).  Used for BA coefficients psi_nu(lambda).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint
import mpmath

from .errors import DenominatorOverflow, DivideByZero, OverflowRisk, PoleAtEvaluationPoint

DEFAULT_MAX_DEGREE = 4000


def max_degree() -> int:
    try:
        return int(os.environ.get("BA_MAX_DEGREE", DEFAULT_MAX_DEGREE))
    except ValueError:
        return DEFAULT_MAX_DEGREE


# ---------------------------------------------------------------------------
# cyclotomic coefficients

_PHI_CACHE: dict = {}


def cyclotomic_modulus(N: int) -> flint.fmpq_poly:
    if N not in _PHI_CACHE:
        _PHI_CACHE[N] = flint.fmpq_poly(flint.fmpz_poly.cyclotomic(N))
    return _PHI_CACHE[N]


class KPoly:
    """Dense polynomial in u with coefficients in Q(zeta_N), stored low degree first.

    Each coefficient is an fmpq_poly in zeta reduced modulo the N-th cyclotomic polynomial.
    Mirrors the subset of the fmpq_poly interface used by Scalar.
    """

    __slots__ = ("c", "N")

    def __init__(self, coeffs: Sequence, N: int):
        phi = cyclotomic_modulus(N)
        c = [flint.fmpq_poly(x) % phi for x in coeffs]
        while c and c[-1].is_zero():
            c.pop()
        self.c = c
        self.N = N

    @classmethod
    def _raw(cls, c, N):
        obj = cls.__new__(cls)
        while c and c[-1].is_zero():
            c.pop()
        obj.c = c
        obj.N = N
        return obj

    def is_zero(self):
        return not self.c

    def degree(self):
        return len(self.c) - 1

    def leading_coefficient(self):
        return self.c[-1]

    def __add__(self, o):
        n = max(len(self.c), len(o.c))
        z = flint.fmpq_poly(0)
        return KPoly._raw([(self.c[i] if i < len(self.c) else z) + (o.c[i] if i < len(o.c) else z)
                           for i in range(n)], self.N)

    def __neg__(self):
        return KPoly._raw([-x for x in self.c], self.N)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, flint.fmpq_poly):
            phi = cyclotomic_modulus(self.N)
            return KPoly._raw([(x * o) % phi for x in self.c], self.N)
        if not self.c or not o.c:
            return KPoly._raw([], self.N)
        phi = cyclotomic_modulus(self.N)
        out = [flint.fmpq_poly(0)] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(o.c):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return KPoly._raw([x % phi for x in out], self.N)

    def __eq__(self, o):
        return isinstance(o, KPoly) and self.N == o.N and self.c == o.c

    def scale_inv(self, k):
        return self * kinv(k, self.N)

    def divmod(self, d: "KPoly"):
        if d.is_zero():
            raise DivideByZero("polynomial division by zero")
        phi = cyclotomic_modulus(self.N)
        inv_lc = kinv(d.c[-1], self.N)
        r = list(self.c)
        q = [flint.fmpq_poly(0)] * max(0, len(r) - len(d.c) + 1)
        while len(r) >= len(d.c) and r:
            f = (r[-1] * inv_lc) % phi
            shift = len(r) - len(d.c)
            q[shift] = f
            for i, b in enumerate(d.c):
                r[shift + i] = (r[shift + i] - f * b) % phi
            while r and r[-1].is_zero():
                r.pop()
        return KPoly._raw(q, self.N), KPoly._raw(r, self.N)

    def monic(self):
        return self.scale_inv(self.c[-1]) if self.c else self

    def gcd(self, o):
        a, b = self, o
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def coeffs(self):
        return list(self.c)


def kinv(a: flint.fmpq_poly, N: int) -> flint.fmpq_poly:
    phi = cyclotomic_modulus(N)
    if N == 1:
        return 1 / a
    g, s, _ = a.xgcd(phi)
    if g.is_zero() or g.degree() != 0:
        raise DivideByZero("non-invertible cyclotomic element")
    return s / g[0]


def _poly_inflate(p, k: int, N: int):
    """p(u) -> p(u^k)."""
    if k == 1:
        return p
    if isinstance(p, KPoly):
        out = [flint.fmpq_poly(0)] * (k * p.degree() + 1) if p.c else []
        for i, c in enumerate(p.c):
            out[k * i] = c
        return KPoly._raw(out, N)
    cs = p.coeffs()
    out = [0] * (k * (len(cs) - 1) + 1) if cs else []
    for i, c in enumerate(cs):
        out[k * i] = c
    return flint.fmpq_poly(out)


def _lift_cyclo(p, N_old: int, N_new: int):
    """Reinterpret coefficients from Q(zeta_{N_old}) inside Q(zeta_{N_new})."""
    if N_old == N_new:
        return p
    k = N_new // N_old
    if isinstance(p, KPoly):
        cs = [_zeta_inflate(c, k) for c in p.c]
    else:
        cs = [flint.fmpq_poly([c]) for c in p.coeffs()]
    return KPoly(cs, N_new)


def _zeta_inflate(c, k):
    cs = c.coeffs()
    out = [0] * (k * (len(cs) - 1) + 1) if cs else [0]
    for i, x in enumerate(cs):
        out[k * i] = x
    return flint.fmpq_poly(out)


class Scalar:
    """Element of Q(zeta_N)(u), u = q^(1/U), kept as a reduced fraction with monic denominator."""

    __slots__ = ("num", "den", "U", "N")

    def __init__(self, num, den=None, U: int = 1, N: int = 1, _reduced: bool = False):
        self.U = U
        self.N = N
        if N == 1:
            num = num if isinstance(num, flint.fmpq_poly) else flint.fmpq_poly(num if isinstance(num, list) else [num])
            den = flint.fmpq_poly([1]) if den is None else (
                den if isinstance(den, flint.fmpq_poly) else flint.fmpq_poly(den if isinstance(den, list) else [den]))
        else:
            num = num if isinstance(num, KPoly) else KPoly(num if isinstance(num, list) else [num], N)
            den = KPoly([1], N) if den is None else (den if isinstance(den, KPoly) else KPoly(den if isinstance(den, list) else [den], N))
        if den.is_zero():
            raise DivideByZero("zero denominator")
        if not _reduced:
            num, den = _reduce(num, den, N)
        self.num, self.den = num, den
        cap = max_degree()
        if num.degree() > cap or den.degree() > cap:
            raise OverflowRisk(f"degree exceeds cap {cap} (set BA_MAX_DEGREE to raise it)")

    # constructors
    @classmethod
    def from_fraction(cls, x, U=1, N=1):
        x = Fraction(x)
        return cls(flint.fmpq(x.numerator, x.denominator), U=U, N=N)

    @classmethod
    def qpow(cls, r, U: int, N: int = 1):
        r = Fraction(r)
        e = r * U
        if e.denominator != 1:
            raise DenominatorOverflow(f"q^{r} is not a power of u = q^(1/{U})")
        e = int(e)
        mono = [0] * abs(e) + [1]
        if e >= 0:
            return cls(mono, U=U, N=N)
        return cls([1], mono, U=U, N=N)

    @classmethod
    def zeta(cls, k: int, N: int, U: int = 1):
        """zeta_N^k as a constant."""
        k %= N
        return cls(KPoly([flint.fmpq_poly([0] * k + [1])], N), U=U, N=N) if N > 1 else cls(1, U=U)

    # coercion
    def lift(self, U: int, N: int) -> "Scalar":
        if U == self.U and N == self.N:
            return self
        if U % self.U or N % self.N:
            raise ValueError("can only lift to multiples")
        k = U // self.U
        num = _poly_inflate(self.num, k, self.N)
        den = _poly_inflate(self.den, k, self.N)
        if N != self.N:
            num = _lift_cyclo(num, self.N, N)
            den = _lift_cyclo(den, self.N, N)
        return Scalar(num, den, U=U, N=N)

    def _coerce(self, o):
        if isinstance(o, Scalar):
            U = math.lcm(self.U, o.U)
            N = math.lcm(self.N, o.N)
            return self.lift(U, N), o.lift(U, N)
        if isinstance(o, (int, Fraction)):
            return self, Scalar.from_fraction(o, self.U, self.N)
        return NotImplemented

    def __add__(self, o):
        c = self._coerce(o)
        if c is NotImplemented:
            return c
        a, b = c
        if a.den == b.den:
            return Scalar(a.num + b.num, a.den, a.U, a.N)
        return Scalar(a.num * b.den + b.num * a.den, a.den * b.den, a.U, a.N)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.num, self.den, self.U, self.N, _reduced=True)

    def __sub__(self, o):
        return self + (-o if isinstance(o, Scalar) else -Fraction(o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        c = self._coerce(o)
        if c is NotImplemented:
            return c
        a, b = c
        return Scalar(a.num * b.num, a.den * b.den, a.U, a.N)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise DivideByZero("division by the zero Scalar")
        return Scalar(self.den, self.num, self.U, self.N)

    def __truediv__(self, o):
        c = self._coerce(o)
        if c is NotImplemented:
            return c
        a, b = c
        return a * b.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Scalar(1, U=self.U, N=self.N)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, o):
        if isinstance(o, (int, Fraction)):
            o = Scalar.from_fraction(o, self.U, self.N)
        if not isinstance(o, Scalar):
            return NotImplemented
        a, b = self._coerce(o)
        return a.num == b.num and a.den == b.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def normalize(self):
        return Scalar(self.num, self.den, self.U, self.N)

    def eval_numeric(self, q0, dps: int = 30) -> complex:
        with mpmath.workdps(dps):
            return complex(self.eval_mp(q0))

    def eval_mp(self, q0):
        u0 = mpmath.power(mpmath.mpmathify(q0), mpmath.mpf(1) / self.U)
        z = mpmath.exp(2j * mpmath.pi / self.N) if self.N > 1 else 1
        d = _eval_poly(self.den, u0, z)
        if d == 0 or abs(d) < mpmath.mpf(10) ** (-mpmath.mp.dps + 5) * max(1, _poly_norm(self.den, u0, z)):
            raise PoleAtEvaluationPoint(f"denominator vanishes at q0={q0}")
        return _eval_poly(self.num, u0, z) / d

    def __repr__(self):
        return f"Scalar(({self.num})/({self.den}); u=q^(1/{self.U}), N={self.N})"

    def to_json(self):
        def enc(p):
            if isinstance(p, KPoly):
                return [[str(x) for x in c.coeffs()] for c in p.c]
            return [str(x) for x in p.coeffs()]
        return {"U": self.U, "N": self.N, "num": enc(self.num), "den": enc(self.den)}


def _eval_poly(p, u0, z):
    acc = mpmath.mpf(0)
    for c in reversed(p.coeffs()):
        if isinstance(c, flint.fmpq_poly):
            cv = mpmath.mpf(0)
            for x in reversed(c.coeffs()):
                cv = cv * z + mpmath.mpf(int(x.p)) / int(x.q)
        else:
            cv = mpmath.mpf(int(c.p)) / int(c.q)
        acc = acc * u0 + cv
    return acc


def _poly_norm(p, u0, z):
    acc = mpmath.mpf(0)
    a = abs(u0)
    for c in reversed(p.coeffs()):
        if isinstance(c, flint.fmpq_poly):
            cv = sum(abs(mpmath.mpf(int(x.p)) / int(x.q)) for x in c.coeffs())
        else:
            cv = abs(mpmath.mpf(int(c.p)) / int(c.q))
        acc = acc * a + cv
    return acc


def _reduce(num, den, N):
    if num.is_zero():
        one = flint.fmpq_poly([1]) if N == 1 else KPoly([1], N)
        return num, one
    g = num.gcd(den)
    if g.degree() > 0:
        if N == 1:
            num = num // g if (num % g).is_zero() else num
            den = den // g
        else:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
    lc = den.leading_coefficient()
    if N == 1:
        if lc != 1:
            num = num / lc
            den = den / lc
    else:
        if not (lc.degree() == 0 and lc[0] == 1):
            inv = kinv(lc, N)
            num = num * inv
            den = den * inv
    return num, den


# ---------------------------------------------------------------------------
# multivariate rational functions in (u, L_1..L_r)

class CoefRing:
    """Q(u, L_1, ..., L_r) for one (datum, ell) pair.

    u = q^(1/U);  L_i = q^(<w'_i, lambda>/dL) with w'_i the fundamental weights of R'.
    """

    def __init__(self, datum, ell: int = 1, U: int = 2, dL: int = 1):
        self.datum = datum
        self.dual = datum.dual()
        self.ell = ell
        self.U = U
        self.dL = dL
        self.r = datum.rank
        names = ("u",) + tuple(f"L{i + 1}" for i in range(self.r))
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "degrevlex")
        self.nv = self.r + 1
        self._one = self.ctx.from_dict({(0,) * self.nv: 1})
        self.zero = RF(self.ctx.from_dict({}), self._one, self, True)
        self.one = RF(self._one, self._one, self, True)

    def __repr__(self):
        return f"CoefRing(U={self.U}, dL={self.dL}, vars={self.nv})"

    # monomials
    def monomial(self, exps: Sequence[int], coeff=1) -> "RF":
        pos = tuple(max(e, 0) for e in exps)
        neg = tuple(max(-e, 0) for e in exps)
        c = Fraction(coeff)
        num = self.ctx.from_dict({pos: flint.fmpq(c.numerator, c.denominator)})
        den = self.ctx.from_dict({neg: 1})
        return RF(num, den, self, True)

    def uexp(self, r) -> int:
        e = Fraction(r) * self.U
        if e.denominator != 1:
            raise DenominatorOverflow(f"q^{r} not representable with u = q^(1/{self.U})")
        return int(e)

    def lexps(self, mu) -> tuple:
        """Exponents of L for Lambda^mu = q^<mu, lambda>."""
        c = self.dual.wcoords(mu)
        out = []
        for x in c:
            e = x * self.dL
            if e.denominator != 1:
                raise DenominatorOverflow(f"Lambda^{mu} not representable (dL={self.dL})")
            out.append(int(e))
        return tuple(out)

    def qpow(self, r, coeff=1) -> "RF":
        return self.monomial((self.uexp(r),) + (0,) * self.r, coeff)

    def lam(self, mu, qshift=0, coeff=1) -> "RF":
        """coeff * q^qshift * Lambda^mu."""
        return self.monomial((self.uexp(qshift),) + self.lexps(mu), coeff)

    def const(self, c) -> "RF":
        c = Fraction(c)
        if c == 0:
            return self.zero
        return RF(self.ctx.from_dict({(0,) * self.nv: flint.fmpq(c.numerator, c.denominator)}), self._one, self, True)

    def coerce(self, x) -> "RF":
        if isinstance(x, RF):
            return x
        if isinstance(x, (int, Fraction)):
            return self.const(x)
        raise TypeError(f"cannot coerce {type(x)} into RF")

    # substitutions -------------------------------------------------------
    def _subst_poly(self, p, ushift_per_var: Sequence[int]):
        """Substitute L_i -> u^{k_i} L_i; returns (poly, min_u_exponent_removed)."""
        items = p.to_dict()
        new = {}
        for e, c in items.items():
            ue = e[0] + sum(k * x for k, x in zip(ushift_per_var, e[1:]))
            key = (ue,) + tuple(e[1:])
            new[key] = new.get(key, 0) + c
        mn = min(k[0] for k in new) if new else 0
        d = {(k[0] - mn,) + k[1:]: c for k, c in new.items() if c != 0}
        return self.ctx.from_dict(d), mn

    def shift_lambda(self, f: "RF", sigma) -> "RF":
        """f(lambda) -> f(lambda + sigma)."""
        ks = []
        for w in self.dual.fundamental_weights:
            ks.append(self.uexp(self.datum.ip(w, sigma) / self.dL))
        if not any(ks):
            return f
        n, a = self._subst_poly(f.num, ks)
        d, b = self._subst_poly(f.den, ks)
        return RF(n, d, self) * self.monomial((a - b,) + (0,) * self.r)

    def reflect_lambda(self, f: "RF", w) -> "RF":
        """f(lambda) -> f(w^{-1} lambda), i.e. Lambda^mu -> Lambda^{w mu}."""
        return self._weyl_poly(f.num, w) / self._weyl_poly(f.den, w)

    def _weyl_poly(self, p, w):
        dd = self.dual
        new = {}
        for e, c in p.to_dict().items():
            mu = dd.from_wcoords([Fraction(int(x), self.dL) for x in e[1:]])
            le = self.lexps(dd.act(w, mu))
            new[(e[0],) + le] = c
        return _laurent_dict_to_rf(self, new)

    def _negate_poly(self, p, which):
        new = {}
        for e, c in p.to_dict().items():
            new[tuple(-x if i in which else x for i, x in enumerate(e))] = c
        return _laurent_dict_to_rf(self, new)

    def negate_lambda(self, f: "RF") -> "RF":
        """f(lambda) -> f(-lambda)."""
        which = set(range(1, self.nv))
        return self._negate_poly(f.num, which) / self._negate_poly(f.den, which)

    def invert_q(self, f: "RF") -> "RF":
        """q -> 1/q, which also sends Lambda^mu = q^<mu, lambda> to its inverse."""
        which = set(range(self.nv))
        return self._negate_poly(f.num, which) / self._negate_poly(f.den, which)

    def specialize(self, f: "RF", lam0=None, N: int = 1) -> Scalar:
        """Substitute lambda = lam0 (a vector) and return a Scalar in a suitable u-refinement."""
        es = []
        if lam0 is not None:
            for w in self.dual.fundamental_weights:
                es.append(self.datum.ip(w, lam0) / self.dL)
        U2 = self.U
        for e in es:
            U2 = math.lcm(U2, e.denominator)
        k = U2 // self.U
        mults = [k] + [int(e * U2) for e in es]
        if lam0 is None:
            if any(e[1:] != (0,) * self.r for e in list(f.num.monoms()) + list(f.den.monoms())):
                raise ValueError("RF depends on lambda; pass lam0")
        n = _to_upoly(f.num, mults)
        d = _to_upoly(f.den, mults)
        sh = n[1] - d[1]
        num, den = n[0], d[0]
        if sh > 0:
            num = num * flint.fmpq_poly([0] * sh + [1])
        elif sh < 0:
            den = den * flint.fmpq_poly([0] * (-sh) + [1])
        if den.is_zero():
            from .errors import PoleAtLambda
            raise PoleAtLambda(f"denominator vanishes at lambda={lam0}")
        s = Scalar(num, den, U=U2, N=1)
        return s.lift(U2, N) if N > 1 else s


def _to_upoly(p, mults):
    terms = {}
    for e, c in zip(p.monoms(), p.coeffs()):
        ue = sum(m * x for m, x in zip(mults, e))
        terms[ue] = terms.get(ue, 0) + c
    terms = {k: v for k, v in terms.items() if v != 0}
    if not terms:
        return flint.fmpq_poly([]), 0
    mn = min(terms)
    mx = max(terms)
    cs = [0] * (mx - mn + 1)
    for k, v in terms.items():
        cs[k - mn] = v
    return flint.fmpq_poly(cs), mn


class RF:
    """Reduced fraction num/den of polynomials in (u, L); den has leading coefficient 1."""

    __slots__ = ("num", "den", "R")

    def __init__(self, num, den, R: CoefRing, reduced: bool = False):
        self.R = R
        if reduced:
            self.num, self.den = num, den
            return
        if den.is_zero():
            raise DivideByZero("zero denominator")
        if num.is_zero():
            self.num, self.den = num, R._one
            return
        if len(den) == 1:
            tc = num.term_content()
            de = den.monoms()[0]
            te = tc.monoms()[0]
            g = tuple(min(a, b) for a, b in zip(de, te))
            dc = den.coeffs()[0]
            if any(g):
                m = R.ctx.from_dict({g: 1})
                num = num / m
                den = den / m
            if dc != 1:
                num = num / dc
                den = den / dc
            self.num, self.den = num, den
            return
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        self.num, self.den = num, den

    def _c(self, o):
        if isinstance(o, RF):
            return o
        if isinstance(o, (int, Fraction)):
            return self.R.const(o)
        return None

    def __add__(self, o):
        o = self._c(o)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        if self.den == o.den:
            return RF(self.num + o.num, self.den, self.R)
        if len(self.den) == 1 and len(o.den) == 1:
            # Laurent fast path: common monomial denominator
            a = self.den.monoms()[0]
            b = o.den.monoms()[0]
            lcm = tuple(max(x, y) for x, y in zip(a, b))
            ctx = self.R.ctx
            fa = ctx.from_dict({tuple(l - x for l, x in zip(lcm, a)): 1})
            fb = ctx.from_dict({tuple(l - x for l, x in zip(lcm, b)): 1})
            return RF(self.num * fa + o.num * fb, ctx.from_dict({lcm: 1}), self.R)
        g = self.den.gcd(o.den)
        if g.is_one():
            return RF(self.num * o.den + o.num * self.den, self.den * o.den, self.R)
        od = o.den / g
        sd = self.den / g
        return RF(self.num * od + o.num * sd, self.den * od, self.R)

    __radd__ = __add__

    def __neg__(self):
        return RF(-self.num, self.den, self.R, True)

    def __sub__(self, o):
        o = self._c(o)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._c(o)
        if o is None:
            return NotImplemented
        if self.num.is_zero() or o.num.is_zero():
            return self.R.zero
        if len(self.den) == 1 and len(o.den) == 1:
            return RF(self.num * o.num, self.den * o.den, self.R)
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n1, d2 = (self.num, o.den) if g1.is_one() else (self.num / g1, o.den / g1)
        n2, d1 = (o.num, self.den) if g2.is_one() else (o.num / g2, self.den / g2)
        num = n1 * n2
        den = d1 * d2
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        return RF(num, den, self.R, True)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise DivideByZero("inverse of zero")
        return RF(self.den, self.num, self.R)

    def __truediv__(self, o):
        o = self._c(o)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.R.one
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def __bool__(self):
        return not self.num.is_zero()

    def is_zero(self):
        return self.num.is_zero()

    def __eq__(self, o):
        o = self._c(o)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def is_laurent(self) -> bool:
        return len(self.den) == 1

    def laurent_terms(self):
        """Yield (u_exponent, L_exponents, coefficient) for a Laurent RF."""
        if not self.is_laurent():
            raise ValueError("not a Laurent polynomial")
        de = self.den.monoms()[0]
        for e, c in zip(self.num.monoms(), self.num.coeffs()):
            yield int(e[0] - de[0]), tuple(int(x - y) for x, y in zip(e[1:], de[1:])), c

    def size(self) -> int:
        return len(self.num) + len(self.den)

    def __repr__(self):
        if self.den.is_one():
            return f"RF({self.num})"
        return f"RF(({self.num})/({self.den}))"


def _laurent_dict_to_rf(R: CoefRing, d: dict) -> RF:
    d = {k: v for k, v in d.items() if v != 0}
    if not d:
        return R.zero
    mins = [min(k[i] for k in d) for i in range(R.nv)]
    mins = [min(m, 0) for m in mins]
    num = R.ctx.from_dict({tuple(x - m for x, m in zip(k, mins)): v for k, v in d.items()})
    den = R.ctx.from_dict({tuple(-m for m in mins): 1})
    return RF(num, den, R)


# ---------------------------------------------------------------------------
# sessions

@dataclass(frozen=True)
class Session:
    datum: object
    ell: int
    U: int
    N: int
    dL: int

    @property
    def D(self) -> int:
        return self.U // 2

    def ring(self) -> CoefRing:
        return _ring_cache(self)

    def qpow(self, r) -> Scalar:
        return Scalar.qpow(r, self.U, self.N)


_RINGS: dict = {}


def _ring_cache(s: Session) -> CoefRing:
    key = (s.datum, s.ell, s.U, s.dL)
    if key not in _RINGS:
        _RINGS[key] = CoefRing(s.datum, s.ell, s.U, s.dL)
    return _RINGS[key]


def _generators(datum) -> list:
    dd = datum.dual()
    gens = [datum.rho, dd.rho]
    gens += list(datum.fundamental_weights) + list(dd.fundamental_weights)
    gens += [tuple(x / 2 for x in a) for a in datum.simple_roots]
    gens += [tuple(x / 2 for x in a) for a in dd.simple_roots]
    if datum.case == "c":
        n = datum.dim
        gens += [tuple(Fraction(int(i == j), 2) for j in range(n)) for i in range(n)]
    return gens


def make_session(datum, ell: int = 1, extra_denominators: Iterable[int] = (), twisted: bool | None = None,
                 max_U: int = 10 ** 6) -> Session:
    """Choose the exponent denominator U = 2D and the cyclotomic order N for a run."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    gens = _generators(datum)
    den = 4
    for a in gens:
        for b in gens:
            den = math.lcm(den, (datum.ip(a, b) / (ell * ell)).denominator)
    for a in datum.roots:
        den = math.lcm(den, (datum.qexp(a) / 4).denominator)
    for e in extra_denominators:
        den = math.lcm(den, int(e))
    U = den if den % 2 == 0 else 2 * den
    if U > max_U:
        raise OverflowRisk(f"exponent denominator {U} exceeds {max_U}")
    dd = datum.dual()
    dL = 1
    for g in gens:
        for c in dd.wcoords(g):
            dL = math.lcm(dL, (c / ell).denominator)
    twisted = ell > 1 if twisted is None else twisted
    if datum.case == "c":
        N = 2 * ell if twisted else 2
    else:
        N = ell if twisted else 1
    return Session(datum, ell, U, N, dL)


# ---------------------------------------------------------------------------
# roots-of-unity admissibility

def roots_of_unity_admissible(datum, q0, tol: float = 1e-12) -> bool:
    """False when one of the listed coincidences occurs at the numeric value q0."""
    q0 = complex(q0)

    def is_one(z):
        return abs(z - 1) < tol

    if datum.case in ("a", "b"):
        for a in datum.positive_roots:
            qa = q0 ** float(datum.qexp(a))
            for j in range(1, int(datum.m(a))):
                if is_one(qa ** j):
                    return False
        return True
    from .rootdata import prec_set
    m1, m2, m3, m4, m5 = datum.params
    for j in range(1, int(m5)):
        if is_one(q0 ** j):
            return False
    vals = [q0 ** float(s) for s in prec_set(m1, m2)] + [-(q0 ** float(s)) for s in prec_set(m3, m4)]
    for i in range(len(vals)):
        for k in range(i + 1, len(vals)):
            if abs(vals[i] - vals[k]) < tol:
                return False
    return True
