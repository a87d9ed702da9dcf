"""Root data (R, m) for the three flavours a, b, c, with Weyl groups, lattices and the support zonotope."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Sequence

from . import _linalg
from .errors import IntegralityViolation, UnsupportedFamily

Vec = tuple  # tuple of Fractions in ambient coordinates


def as_vec(xs: Iterable) -> Vec:
    return tuple(Fraction(x) for x in xs)


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Vec) -> Vec:
    c = Fraction(c)
    return tuple(c * x for x in a)


def vneg(a: Vec) -> Vec:
    return tuple(-x for x in a)


def vzero(n: int) -> Vec:
    return (Fraction(0),) * n


def _lcm_den(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def _unit(n, i, c=1):
    v = [Fraction(0)] * n
    v[i] = Fraction(c)
    return v


def _realize(family: str, n: int, case: str):
    """Ambient dimension, simple roots and the default scale s (gram = s * identity)."""
    fam = family.upper()
    if fam in ("E", "E6", "E7", "E8", "F", "F4"):
        raise UnsupportedFamily(f"family {family} is not supported (A, B, C, D, G2 only)")
    if case == "c":
        if fam != "C":
            raise UnsupportedFamily("case c is realized on C_n only")
        simple = [vsub(_unit(n, i), _unit(n, i + 1)) for i in range(n - 1)] + [tuple(_unit(n, n - 1, 2))]
        return n, simple, Fraction(1)
    if fam == "A":
        if n < 1:
            raise UnsupportedFamily("A_n needs n >= 1")
        if n == 1:
            return 1, [(Fraction(2),)], Fraction(1, 2) if case == "a" else Fraction(1)
        d = n + 1
        return d, [vsub(_unit(d, i), _unit(d, i + 1)) for i in range(n)], Fraction(1)
    if fam == "B":
        if n < 2:
            raise UnsupportedFamily("B_n needs n >= 2")
        simple = [vsub(_unit(n, i), _unit(n, i + 1)) for i in range(n - 1)] + [tuple(_unit(n, n - 1))]
        return n, simple, Fraction(2) if case == "a" else Fraction(1)
    if fam == "C":
        if n < 2:
            raise UnsupportedFamily("C_n needs n >= 2 in cases a, b")
        simple = [vsub(_unit(n, i), _unit(n, i + 1)) for i in range(n - 1)] + [tuple(_unit(n, n - 1, 2))]
        return n, simple, Fraction(1)
    if fam == "D":
        if n < 3:
            raise UnsupportedFamily("D_n needs n >= 3")
        simple = [vsub(_unit(n, i), _unit(n, i + 1)) for i in range(n - 1)]
        simple.append(vadd(_unit(n, n - 2), _unit(n, n - 1)))
        return n, simple, Fraction(1)
    if fam in ("G", "G2"):
        if n != 2:
            raise UnsupportedFamily("G2 has rank 2")
        return 3, [as_vec((1, -1, 0)), as_vec((-2, 1, 1))], Fraction(1)
    raise UnsupportedFamily(f"unknown family {family}")


def dual_parameters_c(m: Sequence) -> tuple:
    """The dual five parameters m* of case c."""
    m1, m2, m3, m4, m5 = (Fraction(x) for x in m)
    h = Fraction(1, 2)
    return (h + h * (m1 + m2 + m3 + m4),
            -h + h * (m1 + m2 - m3 - m4),
            -h + h * (m1 - m2 + m3 - m4),
            -h + h * (m1 - m2 - m3 + m4),
            m5)


def prec_set(b, c) -> list:
    """Sorted positive s with s in (b - Z_+) or (c - Z_+)."""
    out = set()
    for top in (Fraction(b), Fraction(c)):
        s = top
        while s > 0:
            out.add(s)
            s -= 1
    return sorted(out)


def check_c_integrality(m: Sequence) -> None:
    m = [Fraction(x) for x in m]
    half = Fraction(1, 2)

    def half_odd(x):
        return (x - half).denominator == 1

    problems = []
    for a, b in ((m[0], m[1]), (m[2], m[3])):
        if not (half_odd(a + b) and half_odd(a - b)):
            problems.append(f"({a}, {b}) is not one integer and one half-integer")
    md = dual_parameters_c(m)
    for i in range(4):
        if m[i] < -half or md[i] < -half:
            problems.append(f"m_{i + 1} or its dual is below -1/2")
    if m[4] < 0 or m[4].denominator != 1:
        problems.append("m_5 must be a nonnegative integer")
    if problems:
        raise IntegralityViolation("; ".join(problems))


@dataclass(frozen=True)
class RootDatum:
    """The pair (R, m) together with its case tag.

    ``params`` is (m_short, m_long) in cases a and b and (m1, ..., m5) in case c.
    The Euclidean form is ``scale`` times the standard one on the ambient space.
    """

    case: str
    family: str
    rank: int
    simple_roots: tuple
    scale: Fraction
    params: tuple
    strict: bool = field(default=True, compare=False)

    # ---- basic geometry -------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.simple_roots[0])

    def ip(self, a: Vec, b: Vec) -> Fraction:
        return self.scale * sum((x * y for x, y in zip(a, b)), Fraction(0))

    def norm2(self, a: Vec) -> Fraction:
        return self.ip(a, a)

    def coroot(self, a: Vec) -> Vec:
        return vscale(2 / self.norm2(a), a)

    def reflect(self, a: Vec, v: Vec) -> Vec:
        return vsub(v, vscale(self.ip(v, self.coroot(a)), a))

    @cached_property
    def simple_coroots(self) -> tuple:
        return tuple(self.coroot(a) for a in self.simple_roots)

    @cached_property
    def cartan(self) -> tuple:
        return tuple(tuple(self.ip(a, b) for b in self.simple_coroots) for a in self.simple_roots)

    @cached_property
    def fundamental_weights(self) -> tuple:
        inv = _linalg.inverse(self.cartan)
        out = []
        for i in range(self.rank):
            v = vzero(self.dim)
            for j in range(self.rank):
                v = vadd(v, vscale(inv[i][j], self.simple_roots[j]))
            out.append(v)
        return tuple(out)

    def wcoords(self, v: Vec) -> tuple:
        """Coordinates in the basis of fundamental weights."""
        return tuple(self.ip(v, c) for c in self.simple_coroots)

    def from_wcoords(self, c: Sequence) -> Vec:
        v = vzero(self.dim)
        for ci, w in zip(c, self.fundamental_weights):
            if ci:
                v = vadd(v, vscale(ci, w))
        return v

    def root_coords(self, v: Vec) -> tuple:
        """Coordinates in the basis of simple roots."""
        return tuple(2 * self.ip(v, w) / self.norm2(a)
                     for a, w in zip(self.simple_roots, self.fundamental_weights))

    def in_V(self, v: Vec) -> bool:
        return self.from_wcoords(self.wcoords(v)) == tuple(v)

    def in_P(self, v: Vec) -> bool:
        return self.in_V(v) and all(c.denominator == 1 for c in self.wcoords(v))

    def in_Q(self, v: Vec) -> bool:
        return self.in_V(v) and all(c.denominator == 1 for c in self.root_coords(v))

    # ---- Weyl group -------------------------------------------------------
    @cached_property
    def weyl_group(self) -> tuple:
        """Elements as tuples of column images of the ambient basis, identity first."""
        n = self.dim
        ident = tuple(tuple(_unit(n, i)) for i in range(n))
        gens = [tuple(self.reflect(a, col) for col in ident) for a in self.simple_roots]
        seen = {ident: None}
        order = [ident]
        frontier = [ident]
        while frontier:
            nxt = []
            for w in frontier:
                for s in gens:
                    sw = tuple(self._apply_cols(s, col) for col in w)
                    if sw not in seen:
                        seen[sw] = None
                        order.append(sw)
                        nxt.append(sw)
            frontier = nxt
        return tuple(order)

    @staticmethod
    def _apply_cols(w, v: Vec) -> Vec:
        out = [Fraction(0)] * len(v)
        for vi, col in zip(v, w):
            if vi:
                for k, c in enumerate(col):
                    if c:
                        out[k] += vi * c
        return tuple(out)

    def act(self, w, v: Vec) -> Vec:
        return self._apply_cols(w, v)

    def weyl_inverse(self, w):
        for w2 in self.weyl_group:
            if all(self.act(w, self.act(w2, a)) == a for a in self.simple_roots):
                return w2
        raise AssertionError("no inverse")  # pragma: no cover

    @cached_property
    def _weyl_index(self):
        return {w: i for i, w in enumerate(self.weyl_group)}

    def weyl_length(self, w) -> int:
        pos = set(self.positive_roots)
        return sum(1 for a in self.positive_roots if self.act(w, a) not in pos)

    def weyl_sign(self, w) -> int:
        return -1 if self.weyl_length(w) % 2 else 1

    @cached_property
    def roots(self) -> tuple:
        out = set()
        for w in self.weyl_group:
            for a in self.simple_roots:
                out.add(self.act(w, a))
        return tuple(sorted(out))

    @cached_property
    def positive_roots(self) -> tuple:
        return tuple(a for a in self.roots if all(c >= 0 for c in self.root_coords(a)))

    def is_positive(self, a: Vec) -> bool:
        return all(c >= 0 for c in self.root_coords(a))

    def weyl_orbit(self, v: Vec) -> list:
        v = tuple(Fraction(x) for x in v)
        seen = {v}
        frontier = [v]
        while frontier:
            nxt = []
            for x in frontier:
                for a in self.simple_roots:
                    y = self.reflect(a, x)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen, key=self.sort_key)

    def is_dominant(self, v: Vec) -> bool:
        return all(self.ip(v, a) >= 0 for a in self.simple_roots)

    def dominant_conjugate(self, v: Vec) -> Vec:
        v = tuple(v)
        changed = True
        while changed:
            changed = False
            for a in self.simple_roots:
                if self.ip(v, a) < 0:
                    v = self.reflect(a, v)
                    changed = True
        return v

    def sort_key(self, v: Vec):
        """Reverse-lexicographic order on P-coordinates (largest first when sorted)."""
        return tuple(-c for c in reversed(self.wcoords(v)))

    # ---- multiplicities ---------------------------------------------------
    @cached_property
    def _min_norm(self) -> Fraction:
        return min(self.norm2(a) for a in self.simple_roots)

    def is_short(self, a: Vec) -> bool:
        return self.norm2(a) == self._min_norm

    def is_long_c(self, a: Vec) -> bool:
        """Case c: whether the root lies in 2R^1."""
        return sum(1 for x in a if x != 0) == 1

    def m(self, a: Vec) -> Fraction:
        if self.case == "c":
            if self.is_long_c(a):
                return Fraction(1, 2) + Fraction(1, 2) * sum(self.params[:4], Fraction(0))
            return self.params[4]
        if self.norm2(a) == self._min_norm:
            return self.params[0]
        return self.params[1]

    def qexp(self, a: Vec) -> Fraction:
        """Exponent e with q_alpha = q^e."""
        if self.case == "b":
            return self.norm2(a) / 2
        return Fraction(1)

    def alpha_prime(self, a: Vec) -> Vec:
        return self.coroot(a) if self.case == "a" else a

    @cached_property
    def rho(self) -> Vec:
        v = vzero(self.dim)
        for a in self.positive_roots:
            v = vadd(v, vscale(self.m(a) / 2, a))
        return v

    @cached_property
    def M(self) -> Fraction:
        return sum((self.m(a) for a in self.positive_roots), Fraction(0))

    @cached_property
    def rho_tilde(self) -> Vec:
        v = vzero(self.dim)
        for a in self.positive_roots:
            v = vadd(v, vscale((self.m(a) + 1) / 2, a))
        return v

    @cached_property
    def M_tilde(self) -> Fraction:
        return sum((self.m(a) + 1 for a in self.positive_roots), Fraction(0))

    @property
    def is_trivial(self) -> bool:
        return all(self.m(a) == 0 for a in self.positive_roots)

    # ---- duality ----------------------------------------------------------
    def dual(self) -> "RootDatum":
        if self.case == "b":
            return self
        if self.case == "c":
            return RootDatum("c", self.family, self.rank, self.simple_roots, self.scale,
                             dual_parameters_c(self.params), strict=self.strict)
        simple = tuple(self.coroot(a) for a in self.simple_roots)
        fam = {"B": "C", "C": "B"}.get(self.family, self.family)
        laced = len({self.norm2(a) for a in self.simple_roots}) == 1
        params = self.params if laced else (self.params[1], self.params[0])
        return RootDatum("a", fam, self.rank, simple, self.scale, params, strict=self.strict)

    # ---- description -----------------------------------------------------
    def label(self) -> str:
        return f"{self.family}{self.rank}"

    def summary(self) -> dict:
        return {
            "case": self.case,
            "family": self.family,
            "rank": self.rank,
            "scale": str(self.scale),
            "multiplicities": [str(p) for p in self.params],
            "simple_roots": [[str(c) for c in a] for a in self.simple_roots],
        }

    def __repr__(self):
        ps = ",".join(str(p) for p in self.params)
        return f"RootDatum({self.case}, {self.family}{self.rank}, m=({ps}), scale={self.scale})"


def build_root_datum(case: str, family: str, rank: int, multiplicities, scale=None,
                     strict: bool = True) -> RootDatum:
    """Validate the input and build a RootDatum.

    ``multiplicities`` for cases a, b: a single value, a pair (short, long) or a
    dict with keys ``short``/``long``.  For case c: the five parameters.
    With ``strict=False`` the case c integrality test is skipped and negative integers
    are accepted in cases a, b (used for t = q^k with m = -k).
    """
    case = case.lower()
    if case not in ("a", "b", "c"):
        raise ValueError(f"case must be a, b or c, got {case!r}")
    family = family.upper()
    if family == "G2":
        family = "G"
    dim, simple, s0 = _realize(family, rank, case)
    simple = tuple(as_vec(a) for a in simple)
    s = Fraction(scale) if scale is not None else s0
    if case == "c":
        m = tuple(Fraction(x) for x in multiplicities)
        if len(m) != 5:
            raise IntegralityViolation("case c needs five parameters m1..m5")
        if strict:
            check_c_integrality(m)
        return RootDatum("c", "C", rank, simple, s, m, strict=strict)
    if isinstance(multiplicities, dict):
        ms = Fraction(multiplicities.get("short", multiplicities.get("long", 0)))
        ml = Fraction(multiplicities.get("long", ms))
    elif isinstance(multiplicities, (list, tuple)):
        vals = [Fraction(x) for x in multiplicities]
        ms, ml = (vals[0], vals[0]) if len(vals) == 1 else (vals[0], vals[1])
    else:
        ms = ml = Fraction(multiplicities)
    laced = len({sum(x * x for x in a) for a in simple}) == 1
    if laced and ms != ml:
        raise IntegralityViolation("simply-laced systems take a single multiplicity")
    for x in (ms, ml):
        if x.denominator != 1 or (strict and x < 0):
            raise IntegralityViolation(f"multiplicity {x} is not in Z_+")
    return RootDatum(case, family, rank, simple, s, (ms, ml), strict=strict)


# ---- queries ---------------------------------------------------------------

def weyl_orbit(datum: RootDatum, v) -> list:
    return datum.weyl_orbit(as_vec(v))


@dataclass(frozen=True)
class OperatorWeights:
    minuscule: tuple
    quasi_minuscule: tuple

    def all(self) -> tuple:
        return self.minuscule + self.quasi_minuscule


def minuscule_and_quasiminuscule(datum: RootDatum) -> OperatorWeights:
    """Dominant minuscule and quasi-minuscule weights of R' (cases a, b)."""
    from .errors import WrongCase
    if datum.case == "c":
        raise WrongCase("case c uses the Koornwinder operator")
    dd = datum.dual()
    roots = dd.roots
    coroots = [dd.coroot(b) for b in roots]
    minus = []
    for w in dd.fundamental_weights:
        if all(dd.ip(w, c) in (-1, 0, 1) for c in coroots):
            minus.append(w)
    # dominant short root of R'
    short = [b for b in dd.positive_roots if dd.is_short(b) and dd.is_dominant(b)]
    quasi = []
    for th in short:
        if all(dd.ip(th, c) in (-1, 0, 1) for b, c in zip(roots, coroots) if b != th and b != vneg(th)):
            quasi.append(th)
    return OperatorWeights(tuple(minus), tuple(quasi))


def is_minuscule(datum: RootDatum, pi: Vec) -> bool:
    dd = datum.dual()
    return all(dd.ip(pi, dd.coroot(b)) in (-1, 0, 1) for b in dd.roots)


def _facet_normals(datum: RootDatum) -> list:
    r = datum.rank
    pos = datum.positive_roots
    fw = datum.fundamental_weights
    if r == 1:
        return [datum.simple_roots[0]]
    normals = set()
    for sub in combinations(pos, r - 1):
        rows = [[datum.ip(w, b) for w in fw] for b in sub]
        ns = _linalg.nullspace(rows, r)
        if len(ns) != 1:
            continue
        y = ns[0]
        den = _lcm_den(y)
        yi = [int(c * den) for c in y]
        g = 0
        for c in yi:
            g = math.gcd(g, c)
        yi = [c // g for c in yi]
        first = next(c for c in yi if c)
        if first < 0:
            yi = [-c for c in yi]
        normals.add(tuple(yi))
    return [_combine(datum, yi, fw) for yi in sorted(normals)]


def _combine(datum, coeffs, basis):
    v = vzero(datum.dim)
    for c, b in zip(coeffs, basis):
        if c:
            v = vadd(v, vscale(c, b))
    return v


def _zonotope_halfspaces(datum: RootDatum) -> list:
    hs = []
    for h in _facet_normals(datum):
        bound = sum((datum.m(a) * abs(datum.ip(a, h)) for a in datum.positive_roots), Fraction(0)) / 2
        hs.append((h, bound))
    return hs


def in_zonotope(datum: RootDatum, nu: Vec, halfspaces=None) -> bool:
    """Exact membership in N = { (1/2) sum l_a a : |l_a| <= m_a }."""
    if halfspaces is None:
        halfspaces = _zonotope_halfspaces(datum)
    return all(abs(datum.ip(nu, h)) <= b for h, b in halfspaces)


def support_set(datum: RootDatum, ell: int = 1, refine_Q: bool = False) -> list:
    """Points of rho + P/ell in the zonotope N, sorted by the canonical order."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    hs = _zonotope_halfspaces(datum)
    rho = datum.rho
    rc = datum.wcoords(rho)
    boxes = []
    for i, cor in enumerate(datum.simple_coroots):
        b = sum((datum.m(a) * abs(datum.ip(a, cor)) for a in datum.positive_roots), Fraction(0)) / 2
        lo = math.ceil((-b - rc[i]) * ell)
        hi = math.floor((b - rc[i]) * ell)
        boxes.append([rc[i] + Fraction(k, ell) for k in range(lo, hi + 1)])
    out = []
    for c in product(*boxes):
        nu = datum.from_wcoords(c)
        if not in_zonotope(datum, nu, hs):
            continue
        if refine_Q and not datum.in_Q(vsub(nu, rho)):
            continue
        out.append(nu)
    out.sort(key=datum.sort_key)
    return out


def ell_admissible(datum: RootDatum, ell: int) -> bool:
    """Case a: ell in nu_{R'} Z and in Z / nu_R, with nu_S = max |alpha|^2 / 2 in the datum's own metric."""
    if ell < 1:
        return False
    if datum.case == "b":
        return True
    if datum.case == "c":
        return ell % 2 == 0
    dd = datum.dual()
    nu_dual = max(dd.norm2(a) for a in dd.roots) / 2
    nu_R = max(datum.norm2(a) for a in datum.roots) / 2
    return (Fraction(ell) / nu_dual).denominator == 1 and (ell * nu_R).denominator == 1


def dominance_leq(datum: RootDatum, nu: Vec, lam: Vec) -> bool:
    """nu <= lam: lam - nu in P_+ (nonnegative simple-root coordinates, in P)."""
    d = vsub(lam, nu)
    return datum.in_P(d) and all(c >= 0 for c in datum.root_coords(d))
