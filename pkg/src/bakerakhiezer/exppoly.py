"""Finite exponential sums  sum_nu c_nu e^nu  with e^nu = q^<nu, x>.

Exponents are tuples of Fractions (ambient coordinates of the datum).  The
coefficient ring is pluggable: anything supporting +, -, * and truthiness works
(ints, Fractions, Scalar, RF).
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable

from .errors import NotDivisible


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


class ExpPoly:
    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None, clean: bool = True):
        if terms is None:
            self.terms = {}
        elif clean:
            self.terms = {tuple(k): v for k, v in terms.items() if v}
        else:
            self.terms = terms

    # constructors
    @classmethod
    def mono(cls, nu, c=1) -> "ExpPoly":
        return cls({tuple(Fraction(x) for x in nu): c})

    @classmethod
    def const(cls, c, dim: int) -> "ExpPoly":
        return cls({(Fraction(0),) * dim: c})

    # container protocol
    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __bool__(self):
        return bool(self.terms)

    def support(self) -> list:
        return list(self.terms)

    def coeff(self, nu, zero=0):
        return self.terms.get(tuple(nu), zero)

    # ring operations
    def __add__(self, o: "ExpPoly") -> "ExpPoly":
        out = dict(self.terms)
        for k, v in o.terms.items():
            if k in out:
                s = out[k] + v
                if s:
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = v
        return ExpPoly(out, clean=False)

    def __neg__(self):
        return ExpPoly({k: -v for k, v in self.terms.items()}, clean=False)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if not isinstance(o, ExpPoly):
            return self.scale(o)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in o.terms.items():
                k = _vadd(k1, k2)
                p = v1 * v2
                if k in out:
                    out[k] = out[k] + p
                else:
                    out[k] = p
        return ExpPoly(out)

    def __rmul__(self, c):
        return self.scale(c)

    def scale(self, c) -> "ExpPoly":
        return ExpPoly({k: c * v for k, v in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = None
        base = self
        while n:
            if n & 1:
                out = base if out is None else out * base
            base = base * base
            n >>= 1
        if out is None:
            raise ValueError("0-th power needs the dimension; use ExpPoly.const")
        return out

    def __eq__(self, o):
        if not isinstance(o, ExpPoly):
            return NotImplemented
        if set(self.terms) != set(o.terms):
            return False
        return all(self.terms[k] == o.terms[k] for k in self.terms)

    def map_coeffs(self, fn: Callable) -> "ExpPoly":
        return ExpPoly({k: fn(v) for k, v in self.terms.items()})

    def translate(self, v) -> "ExpPoly":
        """Multiply by e^v."""
        v = tuple(Fraction(x) for x in v)
        return ExpPoly({_vadd(k, v): c for k, c in self.terms.items()}, clean=False)

    def neg_x(self) -> "ExpPoly":
        return ExpPoly({tuple(-x for x in k): c for k, c in self.terms.items()}, clean=False)

    def constant_term(self, zero=0):
        for k, v in self.terms.items():
            if not any(k):
                return v
        return zero

    def __repr__(self):
        return f"ExpPoly({len(self.terms)} terms)"


# ---- operations that need a datum (pairing) and a q-power constructor ----------

def shift(f: ExpPoly, tau, ip: Callable, qpow: Callable) -> ExpPoly:
    """(T^tau f)(x) = f(x + tau): multiply the nu-coefficient by q^<nu, tau>."""
    tau = tuple(Fraction(x) for x in tau)
    if not any(tau):
        return f
    return ExpPoly({k: qpow(ip(k, tau)) * v for k, v in f.terms.items()}, clean=False)


def weyl_act(f: ExpPoly, w, act: Callable) -> ExpPoly:
    """e^nu -> e^{w nu}."""
    return ExpPoly({act(w, k): v for k, v in f.terms.items()}, clean=False)


def constant_term(f: ExpPoly, zero=0):
    return f.constant_term(zero)


def neg_x(f: ExpPoly) -> ExpPoly:
    return f.neg_x()


def residue_classes(f: ExpPoly, beta, ip: Callable) -> dict:
    """Group exponents by class modulo Z beta: rep -> {k: coeff} with nu = rep + k beta."""
    beta = tuple(Fraction(x) for x in beta)
    bb = ip(beta, beta)
    classes: dict = {}
    for nu, c in f.terms.items():
        t = ip(nu, beta) / bb
        k = math.floor(t)
        rep = tuple(x - k * b for x, b in zip(nu, beta))
        classes.setdefault(rep, {})[k] = c
    return classes


def divide_by_binomial(f: ExpPoly, beta, c, ip: Callable) -> ExpPoly:
    """Return g with (e^beta - c) g = f, else raise NotDivisible carrying the failing class."""
    beta = tuple(Fraction(x) for x in beta)
    if not any(beta):
        raise ValueError("beta must be nonzero")
    out = {}
    for rep, ks in sorted(residue_classes(f, beta, ip).items()):
        kmin, kmax = min(ks), max(ks)
        h = None
        hs = {}
        for k in range(kmax, kmin, -1):
            g = ks.get(k)
            nh = g if h is None else (h * c if g is None else g + c * h)
            hs[k - 1] = nh
            h = nh
        g0 = ks[kmin]
        rem = g0 if h is None else g0 + c * h
        if rem:
            raise NotDivisible(f"not divisible by e^{beta} - {c!r}", residue_class=rep)
        for k, v in hs.items():
            if v:
                out[tuple(x + k * b for x, b in zip(rep, beta))] = v
    return ExpPoly(out, clean=False)


def vanishes_on_subvariety(f: ExpPoly, beta, c, ip: Callable) -> bool:
    try:
        divide_by_binomial(f, beta, c, ip)
        return True
    except NotDivisible:
        return False


def binomial(beta, c, dim: int) -> ExpPoly:
    """e^beta - c."""
    return ExpPoly({tuple(Fraction(x) for x in beta): 1}) + ExpPoly.const(-c, dim)


def orbit_sum(datum, lam, coeff=1) -> ExpPoly:
    return ExpPoly({tau: coeff for tau in datum.weyl_orbit(lam)})


def canonical_text(f: ExpPoly, datum, fmt: Callable = str) -> str:
    """Terms sorted in reverse-lexicographic order of P-coordinates."""
    keys = sorted(f.terms, key=datum.sort_key)
    parts = []
    for k in keys:
        wc = ",".join(str(x) for x in datum.wcoords(k))
        parts.append(f"[{fmt(f.terms[k])}]e^({wc})")
    return " + ".join(parts) if parts else "0"


def eval_numeric(f: ExpPoly, x, datum, q0, coeff_eval: Callable = complex):
    """Numeric value at a complex point x (ambient coordinates) using mpmath."""
    import mpmath
    lq = mpmath.log(mpmath.mpmathify(q0))
    sc = mpmath.mpf(datum.scale.numerator) / datum.scale.denominator
    xs = [mpmath.mpmathify(complex(a)) for a in x]
    total = mpmath.mpc(0)
    for nu, c in f.terms.items():
        pair = sc * sum((a * mpmath.mpf(b.numerator) / b.denominator for a, b in zip(xs, nu)), mpmath.mpc(0))
        total += coeff_eval(c) * mpmath.exp(lq * pair)
    return total
