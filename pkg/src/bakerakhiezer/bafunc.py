"""Baker-Akhiezer functions: iterative and linear-algebra constructions, normalization,
evaluation, symmetrization, duality and serialization."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import flint

from .errors import (EllNotAdmissible, NormalizationDivideByZero, PoleAtLambda,
                     SolutionSpaceNotOneDimensional, WrongCase)
from .exppoly import ExpPoly
from .macops import ExpFunction, apply, default_operator, eigenvalue, quasi_conditions
from .rootdata import (RootDatum, ell_admissible, in_zonotope, support_set, vadd, vscale,
                       vsub, vzero, _zonotope_halfspaces)
from .scalars import CoefRing, RF, Scalar, make_session
from .weights import delta, to_lambda

PRIME = (1 << 61) - 1


@dataclass
class BaFunction:
    datum: RootDatum
    ell: int
    support: list
    coeffs: dict
    R: CoefRing = field(repr=False)
    normalization_tag: str = "normalized"
    certificate: dict = field(default_factory=dict)

    def as_function(self) -> ExpFunction:
        return ExpFunction(vzero(self.datum.dim), ExpPoly(dict(self.coeffs)), Fraction(1, self.ell))

    def coeff(self, nu):
        return self.coeffs.get(tuple(Fraction(x) for x in nu), self.R.zero)

    def nonzero_support(self) -> list:
        return sorted((nu for nu, c in self.coeffs.items() if c), key=self.datum.sort_key)

    def __eq__(self, o):
        if not isinstance(o, BaFunction):
            return NotImplemented
        keys = set(self.coeffs) | set(o.coeffs)
        return all(self.coeff(k) == o.coeff(k) for k in keys)

    def difference_size(self, o) -> int:
        """Number of exponents where the two functions differ (0 means equal)."""
        keys = set(self.coeffs) | set(o.coeffs)
        return sum(1 for k in keys if not (self.coeff(k) == o.coeff(k)))


def lambda_datum(datum: RootDatum, ell: int = 1) -> RootDatum:
    """The datum governing the lambda variable: R' for ell = 1, R itself for twisted functions."""
    return datum if ell > 1 else datum.dual()


def dual_delta_lambda(datum: RootDatum, R: CoefRing) -> RF:
    """The normalizing coefficient Delta'(lambda) (Delta(lambda) when twisted), in Lambda."""
    return to_lambda(delta(lambda_datum(datum, R.ell), R), R)


def session_for(datum: RootDatum, ell: int = 1):
    s = make_session(datum, ell)
    return s, s.ring()


def _normalize(datum, raw: dict, R: CoefRing, rho) -> dict:
    c = raw.get(rho)
    if c is None or not c:
        raise NormalizationDivideByZero(f"coefficient at the normalization vertex {rho} vanishes")
    f = dual_delta_lambda(datum, R) / c
    return {nu: v * f for nu, v in raw.items() if v}


# ---- iterative construction ---------------------------------------------------

def iteration_shifts(datum: RootDatum) -> list:
    """The nu != 0 of the product formula.  Half-integer m on long roots (case c) uses half steps."""
    choices = []
    for a in datum.positive_roots:
        ma = datum.m(a)
        if datum.case == "c" and datum.is_long_c(a) and ma.denominator != 1:
            steps = [Fraction(k, 2) for k in range(int(2 * ma) + 1)]
        else:
            steps = [Fraction(k) for k in range(int(ma) + 1)]
        choices.append((a, steps))
    seen = set()
    for ls in product(*[s for _, s in choices]):
        nu = vzero(datum.dim)
        for (a, _), l in zip(choices, ls):
            nu = vadd(nu, vscale(l, a))
        if any(nu):
            seen.add(nu)
    return sorted(seen, key=lambda v: (-datum.ip(v, v), datum.sort_key(v)))


def construct_ba_iterative(datum: RootDatum, pi=None, early_stop: bool = True, op=None) -> BaFunction:
    """Product of (D - m_pi(lambda + nu)) applied to q^<lambda + rho, x> Q(x), then normalized."""
    sess, R = session_for(datum)
    if op is None:
        op = default_operator(datum, R) if pi is None else _operator(datum, pi, R)
    rho = datum.rho
    d = delta(datum, R)
    body = d * d.neg_x()
    hs = _zonotope_halfspaces(datum)
    steps = 0
    fun = ExpFunction(rho, body)
    for nu in iteration_shifts(datum):
        if early_stop and steps and _inside(datum, fun, hs):
            break
        g = apply(op, fun, R)
        if not isinstance(g, ExpFunction):
            raise RuntimeError(f"operator left a denominator at step {steps}")
        fun = ExpFunction(rho, g.body - fun.body.scale(eigenvalue(op, R, nu)))
        steps += 1
    if not _inside(datum, fun, hs):
        raise RuntimeError("support did not reach the polytope N")
    raw = {vadd(k, rho): v for k, v in fun.body.terms.items()}
    coeffs = _normalize(datum, raw, R, rho)
    sup = support_set(datum, 1)
    return BaFunction(datum, 1, sup, coeffs, R, "normalized", {"method": "iterative", "factors": steps})


def _operator(datum, pi, R):
    from .macops import build_macdonald_operator
    return build_macdonald_operator(datum, pi, R)


def _inside(datum, f: ExpFunction, hs) -> bool:
    return all(in_zonotope(datum, vadd(k, f.sigma), hs) for k in f.body.terms)


# ---- linear construction ------------------------------------------------------

def condition_rows(datum: RootDatum, ell: int, support: list, R: CoefRing, conditions=None) -> list:
    """Rows {unknown index: RF} of the homogeneous system expressing quasi-invariance."""
    idx = {nu: i for i, nu in enumerate(support)}
    rows = []
    inv = Fraction(1, ell)
    if conditions is None:
        conditions = quasi_conditions(datum, ell)
    for label, tau, kappa, beta, c in conditions:
        bb = datum.ip(beta, beta)
        classes: dict = {}
        for nu, i in idx.items():
            t = datum.ip(nu, tau)
            pair = ((nu, R.lam(vscale(-inv, tau), -t)), (vadd(nu, kappa), -R.lam(vscale(inv, tau), t)))
            for mu, coef in pair:
                k = math.floor(datum.ip(mu, beta) / bb)
                rep = vsub(mu, vscale(k, beta))
                if c == -1 and k % 2:
                    coef = -coef
                row = classes.setdefault(rep, {})
                row[i] = row[i] + coef if i in row else coef
        for row in classes.values():
            row = {i: v for i, v in row.items() if v}
            if row:
                rows.append(row)
    return rows


def _rf_mod(f: RF, vals, p):
    def ev(poly):
        s = 0
        for e, c in zip(poly.monoms(), poly.coeffs()):
            t = int(c.p) % p * pow(int(c.q), -1, p) % p
            for v, k in zip(vals, e):
                t = t * pow(v, k, p) % p
            s = (s + t) % p
        return s
    d = ev(f.den)
    if d == 0:
        raise ZeroDivisionError
    return ev(f.num) * pow(d, -1, p) % p


def modular_rank(rows: list, n: int, R: CoefRing, seed: int = 0) -> dict:
    rng = random.Random(seed)
    for _ in range(5):
        vals = [rng.randrange(2, PRIME - 1) for _ in range(R.nv)]
        try:
            ent = [[0] * n for _ in rows]
            for r, row in enumerate(rows):
                for i, v in row.items():
                    ent[r][i] = _rf_mod(v, vals, PRIME)
        except ZeroDivisionError:
            continue
        if not rows:
            return {"prime": PRIME, "point": vals, "rank": 0, "unknowns": n}
        M = flint.nmod_mat(ent, PRIME)
        return {"prime": PRIME, "point": vals, "rank": M.rank(), "unknowns": n}
    raise RuntimeError("no admissible evaluation point found")


def _propagate(rows: list, n: int, known: dict) -> dict:
    vals = dict(known)
    where: dict = {}
    for r, row in enumerate(rows):
        for i in row:
            where.setdefault(i, []).append(r)
    open_ = [set(i for i in row if i not in vals) for row in rows]
    queue = [r for r in range(len(rows)) if len(open_[r]) == 1]
    while queue:
        r = queue.pop()
        if len(open_[r]) != 1:
            continue
        (u,) = open_[r]
        row = rows[r]
        s = None
        for i, a in row.items():
            if i != u:
                s = a * vals[i] if s is None else s + a * vals[i]
        vals[u] = (-s / row[u]) if s is not None else row[u] * 0
        for r2 in where.get(u, ()):
            open_[r2].discard(u)
            if len(open_[r2]) == 1:
                queue.append(r2)
    return vals


def rf_nullspace(rows: list, n: int, zero) -> list:
    """Exact sparse nullspace over RF by incremental reduced echelon form."""
    piv: dict = {}  # col -> row with row[col] == 1
    for row in sorted(rows, key=len):
        r = dict(row)
        changed = True
        while changed:
            changed = False
            for c in [c for c in r if c in piv]:
                a = r.pop(c)
                for k, v in piv[c].items():
                    if k == c:
                        continue
                    nv = r[k] - a * v if k in r else -(a * v)
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
                changed = True
        if not r:
            continue
        c = min(r, key=lambda k: (r[k].size(), k))
        a = r[c]
        r = {k: v / a for k, v in r.items()}
        for pc, prow in piv.items():
            if c in prow:
                b = prow.pop(c)
                for k, v in r.items():
                    if k == c:
                        continue
                    nv = prow[k] - b * v if k in prow else -(b * v)
                    if nv:
                        prow[k] = nv
                    else:
                        prow.pop(k, None)
        piv[c] = r
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        vec = {f: None}
        for c, prow in piv.items():
            if f in prow:
                vec[c] = -prow[f]
        basis.append(vec)
    return basis


def construct_ba_linear(datum: RootDatum, ell: int = 1, allow_fallback: bool = True,
                        twisted: bool | None = None) -> BaFunction:
    """Solve the quasi-invariance system for the coefficients; normalize at rho.

    ``twisted=True`` with ell = 1 (case b only) uses the unrefined support rho + P.
    """
    twisted = ell > 1 if twisted is None else twisted
    if twisted and ell == 1 and datum.case != "b":
        raise WrongCase("the ell = 1 twisted system is only compared in case b")
    if ell > 1 and not ell_admissible(datum, ell):
        raise EllNotAdmissible(f"ell={ell} is not admissible for {datum.label()}")
    sess, R = session_for(datum, ell)
    refine = datum.case in ("a", "b") and not twisted
    sup = support_set(datum, ell, refine_Q=refine)
    n = len(sup)
    rows = condition_rows(datum, ell, sup, R)
    cert = modular_rank(rows, n, R)
    cert["method"] = "linear"
    cert["conditions"] = len(rows)
    if cert["rank"] < n - 1:
        # confirm exactly before reporting
        basis = rf_nullspace(rows, n, R.zero)
        raise SolutionSpaceNotOneDimensional(
            f"solution space has dimension {len(basis)} ({n} unknowns)", dimension=len(basis))
    rho = datum.rho
    irho = sup.index(rho)
    vals = _propagate(rows, n, {irho: dual_delta_lambda(datum, R)})
    ok = len(vals) == n and all(_row_value(row, vals).is_zero() for row in rows)
    if not ok:
        if not allow_fallback:
            raise RuntimeError("propagation did not determine the solution")
        basis = rf_nullspace(rows, n, R.zero)
        if len(basis) != 1:
            raise SolutionSpaceNotOneDimensional(f"dimension {len(basis)}", dimension=len(basis))
        (vec,) = basis
        free = [k for k, v in vec.items() if v is None][0]
        full = {k: (R.one if v is None else v) for k, v in vec.items()}
        raw = {sup[k]: v for k, v in full.items()}
        coeffs = _normalize(datum, raw, R, rho)
        cert["solver"] = "elimination"
    else:
        coeffs = {sup[i]: v for i, v in vals.items() if v}
        cert["solver"] = "propagation"
    return BaFunction(datum, ell, sup, coeffs, R, "normalized", cert)


def _row_value(row, vals):
    s = None
    for i, a in row.items():
        t = a * vals[i]
        s = t if s is None else s + t
    return s


# ---- rank one closed form -----------------------------------------------------

def rank_one_closed_form(m: int, normalized: bool = True) -> BaFunction:
    """A_1 case b.  Coefficient of q^{(lambda + m - 2s) x}; psi_0 = 1 gauge unless normalized."""
    from .rootdata import build_root_datum
    datum = build_root_datum("b", "A", 1, [m])
    sess, R = session_for(datum)
    one = (Fraction(1),)
    L = R.lam(one)
    Li = R.lam((Fraction(-1),))
    th, tmh = R.qpow(-m), R.qpow(m)  # t^{1/2}, t^{-1/2}
    coeffs = {(Fraction(m),): R.one}
    acc = R.one
    for s in range(1, m + 1):
        n1 = th * R.qpow(s - 1) - tmh * R.qpow(1 - s)
        n2 = th * R.qpow(s - 1) * Li - tmh * R.qpow(1 - s) * L
        d1 = R.qpow(s) - R.qpow(-s)
        d2 = R.qpow(s) * Li - R.qpow(-s) * L
        acc = acc * n1 * n2 / (d1 * d2)
        coeffs[(Fraction(m - 2 * s),)] = acc
    if normalized:
        f = dual_delta_lambda(datum, R)
        coeffs = {k: v * f for k, v in coeffs.items()}
    tag = "normalized" if normalized else "raw"
    return BaFunction(datum, 1, support_set(datum, 1, refine_Q=True), coeffs, R, tag, {"method": "closed_form"})


# ---- evaluation, symmetries, duality ------------------------------------------

def coefficient_at(ba: BaFunction, nu, lam0) -> Scalar:
    try:
        return ba.R.specialize(ba.coeff(nu), lam0)
    except PoleAtLambda as e:
        raise PoleAtLambda(f"pole of psi_{nu} at lambda={lam0}", factor=str(ba.coeff(nu).den)) from e


def specialize_lambda(ba: BaFunction, lam0) -> ExpPoly:
    """psi(lam0, x) as an ExpPoly over Scalars."""
    lam0 = tuple(Fraction(x) for x in lam0)
    out = {}
    for nu, c in ba.coeffs.items():
        if not c:
            continue
        try:
            s = ba.R.specialize(c, lam0)
        except PoleAtLambda:
            raise PoleAtLambda(f"pole of psi_{nu} at lambda={lam0}", factor=str(c.den))
        if s:
            key = vadd(vscale(Fraction(1, ba.ell), lam0), nu)
            out[key] = out[key] + s if key in out else s
    return ExpPoly(out)


def evaluate(ba: BaFunction, lam0, x0, mode: str = "exact", q0=None):
    """psi(lam0, x0): exact Scalar, or a complex number when mode='numeric'."""
    f = specialize_lambda(ba, lam0)
    x0 = tuple(Fraction(x) for x in x0)
    if mode == "exact":
        total = None
        for mu, c in f.terms.items():
            r = ba.datum.ip(mu, x0)
            t = c * Scalar.qpow(r, math.lcm(c.U, r.denominator), c.N)
            total = t if total is None else total + t
        return total if total is not None else Scalar.from_fraction(0)
    if q0 is None:
        raise ValueError("numeric mode needs q0")
    return complex(evaluate(ba, lam0, x0, "exact").eval_numeric(q0))


def symmetrize(ba: BaFunction, lam0, sign: int = 1) -> ExpPoly:
    """Phi_{+/-}(lam0, x) = sum_w (+/-1)^w psi(w lam0, x)."""
    if ba.ell != 1:
        raise WrongCase("symmetrization is defined for ell = 1")
    d = ba.datum
    out = ExpPoly()
    for w in d.weyl_group:
        f = specialize_lambda(ba, d.act(w, lam0))
        if sign < 0 and d.weyl_sign(w) < 0:
            f = -f
        out = out + f
    return out


def bivariate_coefficients(ba: BaFunction) -> dict:
    """(nu, nu') -> coefficient in Q(q^(1/U)), for a Laurent-normalized psi."""
    R = ba.R
    dd = R.dual
    out = {}
    for nu, c in ba.coeffs.items():
        if not c:
            continue
        if not c.is_laurent():
            raise ValueError(f"psi_{nu} is not a Laurent polynomial in Lambda")
        for ue, le, co in c.laurent_terms():
            nup = dd.from_wcoords([Fraction(int(x), R.dL) for x in le])
            s = Scalar.qpow(Fraction(ue, R.U), R.U) * Fraction(int(co.p), int(co.q))
            key = (nu, nup)
            out[key] = out[key] + s if key in out else s
    return out


def swap_variables(ba: BaFunction, target: RootDatum) -> BaFunction:
    """psi(lambda, x) read as a function of (x, lambda) on the dual datum."""
    sess, R2 = session_for(target, ba.ell)
    coeffs: dict = {}
    for (nu, nup), s in bivariate_coefficients(ba).items():
        term = _scalar_to_rf(s, R2) * R2.lam(nu)
        coeffs[nup] = coeffs[nup] + term if nup in coeffs else term
    sup = support_set(target, ba.ell)
    return BaFunction(target, ba.ell, sup, coeffs, R2, ba.normalization_tag, {"method": "swap"})


def _scalar_to_rf(s: Scalar, R: CoefRing) -> RF:
    if s.N != 1:
        raise ValueError("cyclotomic coefficient")
    out = R.zero
    k = Fraction(R.U, s.U)
    if k.denominator != 1:
        raise ValueError("u-refinement mismatch")
    k = int(k)

    def poly(p):
        acc = R.zero
        for i, c in enumerate(p.coeffs()):
            if c != 0:
                acc = acc + R.monomial((i * k,) + (0,) * R.r, Fraction(int(c.p), int(c.q)))
        return acc
    return poly(s.num) / poly(s.den)


def reflect(ba: BaFunction, w) -> BaFunction:
    """The function (lambda, x) -> psi(w^{-1} lambda, w^{-1} x), returned as a BaFunction."""
    d = ba.datum
    R = ba.R
    coeffs = {}
    for nu, c in ba.coeffs.items():
        coeffs[d.act(w, nu)] = R.reflect_lambda(c, w)
    return BaFunction(d, ba.ell, ba.support, coeffs, R, ba.normalization_tag, {"method": "reflect"})


# ---- serialization --------------------------------------------------------------

def _frac(x):
    return str(Fraction(x))


def _poly_json(p):
    return [[[int(x) for x in e], str(c)] for e, c in sorted(zip(p.monoms(), p.coeffs()), key=lambda t: t[0])]


def to_json(ba: BaFunction) -> str:
    d = ba.datum
    doc = {
        "datum": d.summary(),
        "ell": ba.ell,
        "U": ba.R.U,
        "dL": ba.R.dL,
        "variables": list(ba.R.ctx.names()),
        "normalization": ba.normalization_tag,
        "terms": [
            {"nu": [_frac(x) for x in nu], "nu_weight_coords": [_frac(x) for x in d.wcoords(nu)],
             "num": _poly_json(ba.coeffs[nu].num), "den": _poly_json(ba.coeffs[nu].den)}
            for nu in ba.nonzero_support()
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def from_json(text: str, datum: RootDatum) -> BaFunction:
    doc = json.loads(text)
    sess, R = session_for(datum, doc["ell"])
    if R.U != doc["U"] or R.dL != doc["dL"]:
        R = CoefRing(datum, doc["ell"], doc["U"], doc["dL"])

    def poly(lst):
        return R.ctx.from_dict({tuple(e): flint.fmpq(*_pq(c)) for e, c in lst})
    coeffs = {}
    for t in doc["terms"]:
        nu = tuple(Fraction(x) for x in t["nu"])
        coeffs[nu] = RF(poly(t["num"]), poly(t["den"]), R)
    return BaFunction(datum, doc["ell"], support_set(datum, doc["ell"]), coeffs, R, doc["normalization"], {"method": "json"})


def _pq(s):
    f = Fraction(s)
    return f.numerator, f.denominator
