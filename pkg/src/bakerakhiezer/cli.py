"""Command-line front end: construct, verify, list-identities, describe-datum.

Exit codes: 0 pass, 1 usage or configuration error, 2 construction failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import identities as I
from .bafunc import construct_ba_iterative, construct_ba_linear, to_json
from .errors import BAError
from .rootdata import (RootDatum, build_root_datum, ell_admissible, minuscule_and_quasiminuscule, support_set,
                       vneg, vscale, vzero)
from .weights import C_exponent

EXIT_OK, EXIT_USAGE, EXIT_CONSTRUCT, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def parse_rational(s) -> Fraction:
    try:
        if isinstance(s, float):
            return Fraction(str(s))
        return Fraction(s)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ConfigError(f"not a rational number: {s!r}") from e


def parse_vector(v, field_name: str):
    if v is None:
        return None
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split()]
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"field {field_name!r}: expected a list of rationals")
    return tuple(parse_rational(x) for x in v)


@dataclass
class RunConfig:
    case: str = "b"
    family: str = "A"
    rank: int = 1
    multiplicities: tuple = (Fraction(1),)
    ell: int = 1
    identities: list = field(default_factory=list)
    lam: tuple | None = None
    mu: tuple | None = None
    xi: tuple | None = None
    lam_weights: tuple | None = None
    mu_weights: tuple | None = None
    q0: Fraction = Fraction(1, 2)
    tol: float = 1e-9
    truncation: dict = field(default_factory=dict)
    out: str | None = None
    jobs: int = 1
    strict: bool = True

    def datum(self) -> RootDatum:
        return build_root_datum(self.case, self.family, self.rank, list(self.multiplicities), strict=self.strict)


_KEYS = {"datum", "ell", "identities", "lambda", "mu", "xi", "lambda_weights", "mu_weights", "q0", "tol",
         "truncation", "out", "jobs"}


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ConfigError(f"unknown field(s): {sorted(unknown)}")
    cfg = RunConfig()
    d = doc.get("datum", {})
    if not isinstance(d, dict):
        raise ConfigError("field 'datum': expected an object")
    try:
        cfg.case = str(d.get("case", cfg.case)).lower()
        cfg.family = str(d.get("family", cfg.family))
        cfg.rank = int(d.get("rank", cfg.rank))
        m = d.get("multiplicities", d.get("m", [1]))
        m = m if isinstance(m, list) else [m]
        cfg.multiplicities = tuple(parse_rational(x) for x in m)
        cfg.strict = bool(d.get("strict", True))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"field 'datum': {e}") from e
    if "ell" in doc:
        cfg.ell = _int_field(doc["ell"], "ell")
    ids = doc.get("identities", [])
    if not isinstance(ids, list) or not all(isinstance(x, str) for x in ids):
        raise ConfigError("field 'identities': expected a list of strings")
    cfg.identities = list(ids)
    cfg.lam = parse_vector(doc.get("lambda"), "lambda")
    cfg.mu = parse_vector(doc.get("mu"), "mu")
    cfg.xi = parse_vector(doc.get("xi"), "xi")
    cfg.lam_weights = parse_vector(doc.get("lambda_weights"), "lambda_weights")
    cfg.mu_weights = parse_vector(doc.get("mu_weights"), "mu_weights")
    if "q0" in doc:
        cfg.q0 = parse_rational(doc["q0"])
    if "tol" in doc:
        try:
            cfg.tol = float(doc["tol"])
        except (TypeError, ValueError) as e:
            raise ConfigError("field 'tol': expected a number") from e
    tr = doc.get("truncation", {})
    if not isinstance(tr, dict):
        raise ConfigError("field 'truncation': expected an object")
    cfg.truncation = tr
    cfg.out = doc.get("out")
    if "jobs" in doc:
        cfg.jobs = _int_field(doc["jobs"], "jobs")
    return cfg


def _int_field(v, name):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"field {name!r}: expected an integer")
    return v


# ---------------------------------------------------------------------------
# identity registry


class Context:
    """Lazily built objects shared by the checks of one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.datum = cfg.datum()
        self._ba = None

    @property
    def ba(self):
        if self._ba is None:
            self._ba = construct_ba_linear(self.datum, 1)
        return self._ba

    def vec(self, which: str):
        d = self.datum
        direct = getattr(self.cfg, which)
        coords = getattr(self.cfg, which + "_weights", None)
        if direct is not None:
            if len(direct) != d.dim:
                raise ConfigError(f"{which}: expected {d.dim} coordinates")
            return direct
        if coords is not None:
            if len(coords) != d.rank:
                raise ConfigError(f"{which}_weights: expected {d.rank} coordinates")
            return d.from_wcoords(coords)
        return None

    def spectral(self):
        """(lambda, mu): configured, or small generic defaults."""
        d = self.datum
        fw = d.fundamental_weights
        lam = self.vec("lam")
        mu = self.vec("mu")
        if lam is None:
            lam = vscale(Fraction(1, 3), fw[0])
        if mu is None:
            mu = vscale(Fraction(-2, 5), fw[-1])
        return lam, mu

    def dominant_list(self):
        lam = self.vec("lam")
        if lam is not None:
            return [lam]
        return [vzero(self.datum.dim)] + list(self.datum.fundamental_weights)

    def twisted(self):
        d = self.datum
        return construct_ba_linear(d if d.case == "b" else d.dual(), self.cfg.ell)


def _eigen(ctx):
    return [I.verify_eigen(ctx.ba, pi) for pi in I.operator_weights(ctx.datum)]


def _cross(ctx):
    it = construct_ba_iterative(ctx.datum)
    lin = ctx.ba
    ok = it == lin
    return [I.VerificationReport("cross_construction", {}, "iterative", "linear", 0.0 if ok else None,
                                 0.0 if ok else None, "pass" if ok else "fail", datum=ctx.datum.summary(),
                                 details={"differing": lin.difference_size(it)})]


def _orth(ctx):
    lam, mu = ctx.vec("lam"), ctx.vec("mu")
    pairs = [(lam, mu)] if lam is not None and mu is not None else I.orthogonality_grid(ctx.datum, 10)
    return [I.verify_orthogonality(ctx.ba, a, b) for a, b in pairs]


def _norm(ctx):
    return [I.verify_norm_identity(ctx.datum, lam) for lam in ctx.dominant_list()]


def _weyl(ctx):
    return [I.verify_weyl_formula(ctx.ba, lam, -1) for lam in ctx.dominant_list()]


def _weyl_plus(ctx):
    if ctx.cfg.lam is not None or ctx.cfg.lam_weights is not None:
        return [I.verify_weyl_formula(ctx.ba, sign=+1, index=ctx.vec("lam"))]
    return [I.verify_weyl_formula(ctx.ba, lam, +1) for lam in ctx.dominant_list()]


def _weyl_character(ctx):
    return [I.verify_weyl_character(ctx.datum, lam) for lam in ctx.dominant_list()]


def _eval_formula(ctx):
    d = ctx.datum
    base = I.vadd(d.rho_tilde, d.rho)
    mus = [ctx.vec("mu")] if ctx.vec("mu") is not None else [I.vadd(base, w) for w in [vzero(d.dim)] +
                                                              list(d.fundamental_weights)]
    return [I.verify_evaluation_formula(ctx.ba, mu) for mu in mus]


def _cmm(ctx):
    lam, mu = ctx.spectral()
    return [I.verify_cmm_integral(ctx.ba, lam, mu, ctx.cfg.q0, ctx.cfg.tol)]


def _cmm_rho(ctx):
    d = ctx.datum
    return [I.verify_cmm_integral(ctx.ba, d.rho, d.rho, ctx.cfg.q0, ctx.cfg.tol)]


def _cmm_compact(ctx):
    lam, mu = ctx.spectral()
    if ctx.cfg.lam is None and ctx.cfg.lam_weights is None:
        lam, mu = ctx.datum.fundamental_weights[0], vneg(ctx.datum.fundamental_weights[0])
    return [I.verify_cmm_compact(ctx.ba, lam, mu, ctx.cfg.q0, ctx.cfg.tol)]


def _qmm(variant):
    def run(ctx):
        return [I.verify_qmm(ctx.datum, variant, ctx.cfg.q0, ctx.cfg.tol)]
    return run


def _mm(ctx):
    lam, mu = ctx.vec("lam"), ctx.vec("mu")
    z = vzero(ctx.datum.dim)
    return [I.verify_cherednik_macdonald(ctx.ba, lam if lam is not None else z, mu if mu is not None else z,
                                         ctx.cfg.q0, ctx.cfg.tol)]


def _xis(ctx):
    xi = ctx.vec("xi")
    return [xi] if xi is not None else I.generic_xi(ctx.datum, 3)


def _summation(form):
    def run(ctx):
        lam, mu = ctx.spectral()
        if form == "theta" and ctx.cfg.lam is None and ctx.cfg.lam_weights is None:
            mu = I.vsub(lam, ctx.datum.fundamental_weights[0])
        tol = ctx.cfg.tol if ctx.cfg.tol != 1e-9 else 1e-8
        return [I.verify_summation(ctx.ba, lam, mu, xi, ctx.cfg.q0, tol, form) for xi in _xis(ctx)]
    return run


def _twisted_existence(ctx):
    d = ctx.datum
    return [I.verify_twisted_existence(d if d.case == "b" else d.dual(), ctx.cfg.ell)[1]]


def _twisted_self_duality(ctx):
    return [I.verify_twisted_self_duality(ctx.twisted())]


def _twisted_ell_one(ctx):
    return [I.verify_ell_one_degeneration(ctx.datum)]


def _twisted_cmm(ctx):
    lam, mu = ctx.spectral()
    return [I.verify_cmm_integral(ctx.ba, lam, mu, ctx.cfg.q0, ctx.cfg.tol, ctx.cfg.ell, ctx.twisted())]


def _twisted_summation(ctx):
    lam, mu = ctx.spectral()
    tw = ctx.twisted()
    return [I.verify_summation(ctx.ba, lam, mu, xi, ctx.cfg.q0, ctx.cfg.tol, "general", ctx.cfg.ell, tw)
            for xi in _xis(ctx)]


def _gain(ctx):
    return [I.verify_gaussian_gain(ctx.datum, ctx.cfg.ell)]


def _twisted_operator(ctx):
    d = ctx.datum
    if d.case != "b":
        raise I.WrongCase("operator discovery is run in case b")
    tw = construct_ba_linear(d, ctx.cfg.ell)
    depth = int(ctx.cfg.truncation.get("operator_depth", 10))
    pis = [w for w in d.fundamental_weights if w in minuscule_and_quasiminuscule(d).minuscule]
    pis = pis or [d.fundamental_weights[0]]
    out, ops = [], []
    for pi in pis:
        op, rep = I.discover_twisted_operator(tw, pi, depth)
        ops.append(op)
        out += [rep, I.verify_operator_eigen(op, tw)]
    if len(ops) >= 2:
        out.append(I.verify_operator_commutation(ops[0], ops[1]))
    return out


REGISTRY = {
    "cross_construction": (_cross, "iterative and linear constructions agree exactly"),
    "eigen": (_eigen, "D psi = m(lambda) psi for each available operator"),
    "orthogonality": (_orth, "torus pairing of psi(lambda) and psi(mu), both chambers, with residues"),
    "duality": (lambda c: [I.verify_duality(c.ba)], "psi(lambda, x) = psi'(x, lambda)"),
    "symmetries": (lambda c: [I.verify_symmetries(c.ba)], "reflection, negation and q -> 1/q symmetries"),
    "evaluation": (lambda c: [I.verify_evaluation(c.ba)], "psi(w rho, x) = Delta'(-rho)"),
    "small_invariance": (lambda c: [I.verify_small_invariance(c.ba)], "W-invariance at small weights"),
    "norm": (_norm, "norm of the Macdonald polynomial at t = q^(m+1)"),
    "weyl": (_weyl, "antisymmetrized psi against delta(x) p_lambda(x; q, q^(m+1))"),
    "weyl_plus": (_weyl_plus, "symmetrized psi against p(x; q, q^(-m))"),
    "weyl_character": (_weyl_character, "m = 0: Weyl character and dimension formulas"),
    "evaluation_formula": (_eval_formula, "p_mu(-rho'; q, q^(-m)) in closed form"),
    "cmm": (_cmm, "Gaussian integral of psi(lambda) psi(mu)"),
    "cmm_rho": (_cmm_rho, "the Gaussian integral at lambda = mu = rho"),
    "cmm_compact": (_cmm_compact, "theta-weighted torus form, lambda + mu in P"),
    "qmm_k": (_qmm("k"), "q-Macdonald-Mehta integral at t = q^(m+1)"),
    "qmm_m": (_qmm("m"), "q-Macdonald-Mehta integral at t = q^(-m)"),
    "cherednik_macdonald": (_mm, "Gaussian pairing of Macdonald polynomials"),
    "summation": (_summation("general"), "lattice sum over xi + P, Gaussian-sum form"),
    "summation_theta": (_summation("theta"), "lattice sum over xi + P, theta form"),
    "twisted_existence": (_twisted_existence, "psi_ell exists with a one-dimensional solution space"),
    "twisted_self_duality": (_twisted_self_duality, "psi_ell(lambda, x) = psi_ell(x, lambda)"),
    "twisted_ell_one": (_twisted_ell_one, "the twisted system at ell = 1 gives psi"),
    "twisted_cmm": (_twisted_cmm, "Gaussian integral with q^(-ell |x|^2/2) against psi_ell"),
    "twisted_summation": (_twisted_summation, "lattice sum with q^(ell |x|^2/2) against psi_ell"),
    "gaussian_gain": (_gain, "quasi-invariance of q^(-ell |x|^2/2) on exponents"),
    "twisted_operator": (_twisted_operator, "discover the twisted operators in lambda and check them"),
}


def error_report(ident: str, err: Exception, datum=None) -> dict:
    kind = err.kind if isinstance(err, BAError) else type(err).__name__
    doc = {"id": ident, "verdict": "error", "error": kind, "message": str(err)}
    if datum is not None:
        doc["datum"] = datum.summary()
    coll = getattr(err, "collisions", None)
    if coll is not None:
        doc["singular_predicate"] = {"well_defined": not coll, "collisions": [[str(x) for x in c] for c in coll]}
    return doc


def run_identity(cfg: RunConfig, ident: str) -> list:
    """Reports (as dicts) for one identity; errors become 'error' records."""
    ctx = Context(cfg)
    fn = REGISTRY[ident][0]
    try:
        return [r.to_dict() for r in fn(ctx)]
    except (BAError, ValueError, ArithmeticError) as e:
        return [error_report(ident, e, ctx.datum)]


# ---------------------------------------------------------------------------
# commands


def _write_lines(path, lines):
    text = "".join(json.dumps(x, sort_keys=True, ensure_ascii=False) + "\n" for x in lines)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(cfg: RunConfig) -> int:
    unknown = [i for i in cfg.identities if i not in REGISTRY]
    if unknown:
        print(f"error: unknown identity id(s): {', '.join(unknown)}", file=sys.stderr)
        return EXIT_USAGE
    if not cfg.identities:
        print("error: no identity requested (use --identity)", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg.datum()
    except (BAError, ValueError) as e:
        print(f"error: datum: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.jobs > 1 and len(cfg.identities) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run_identity, [cfg] * len(cfg.identities), cfg.identities))
    else:
        results = [run_identity(cfg, i) for i in cfg.identities]
    lines = [r for rs in results for r in rs]
    _write_lines(cfg.out, lines)
    summary = sys.stdout if cfg.out else sys.stderr
    bad = 0
    for r in lines:
        v = r.get("verdict")
        bad += v != "pass"
        extra = r.get("error") or (f"rel_err={r['rel_err']}" if r.get("rel_err") is not None else "")
        print(f"{v.upper():5s} {r['id']} {extra}".rstrip(), file=summary)
    print(f"{len(lines) - bad}/{len(lines)} passed", file=summary)
    return EXIT_OK if bad == 0 else EXIT_VERIFY


def cmd_construct(cfg: RunConfig) -> int:
    try:
        d = cfg.datum()
    except (BAError, ValueError) as e:
        print(f"error: datum: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        ba = construct_ba_linear(d, cfg.ell)
    except BAError as e:
        print(json.dumps({"error": e.kind, "message": str(e)}, sort_keys=True), file=sys.stderr)
        return EXIT_CONSTRUCT
    text = to_json(ba) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def describe(d: RootDatum) -> dict:
    doc = d.summary()
    doc.update({
        "dimension": d.dim,
        "positive_roots": [[str(x) for x in a] for a in d.positive_roots],
        "weyl_group_order": len(d.weyl_group),
        "rho": [str(x) for x in d.rho],
        "M": str(d.M),
        "C_exponent": str(C_exponent(d)),
        "support_size": len(support_set(d, 1, refine_Q=d.case in ("a", "b"))),
        "admissible_ell_up_to_6": [l for l in range(1, 7) if ell_admissible(d, l)],
    })
    if d.case != "c":
        ow = minuscule_and_quasiminuscule(d)
        doc["minuscule"] = [[str(x) for x in w] for w in ow.minuscule]
        doc["quasi_minuscule"] = [[str(x) for x in w] for w in ow.quasi_minuscule]
    return doc


def cmd_describe(cfg: RunConfig) -> int:
    try:
        d = cfg.datum()
    except (BAError, ValueError) as e:
        print(f"error: datum: {e}", file=sys.stderr)
        return EXIT_USAGE
    _write_lines(cfg.out, [describe(d)])
    return EXIT_OK


def cmd_list() -> int:
    for k, (_, doc) in REGISTRY.items():
        print(f"{k:22s} {doc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bakerakhiezer", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("construct", "verify", "list-identities", "describe-datum"):
        s = sub.add_parser(name)
        if name == "list-identities":
            continue
        s.add_argument("--config", help="JSON configuration file")
        s.add_argument("--case", choices=["a", "b", "c"])
        s.add_argument("--family")
        s.add_argument("--rank", type=int)
        s.add_argument("--m", help="multiplicities, e.g. '1' or '1,2' or '1/2,0,1/2,0,1'")
        s.add_argument("--ell", type=int)
        s.add_argument("--out")
        if name == "verify":
            s.add_argument("--identity", action="append", default=None)
            s.add_argument("--q0")
            s.add_argument("--tol", type=float)
            s.add_argument("--jobs", type=int)
            s.add_argument("--lambda", dest="lam", help="ambient coordinates, e.g. '1/3,-1/3'")
            s.add_argument("--mu")
            s.add_argument("--xi")
    return p


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    cfg = replace(cfg)
    if getattr(args, "case", None):
        cfg.case = args.case
    if getattr(args, "family", None):
        cfg.family = args.family
    if getattr(args, "rank", None) is not None:
        cfg.rank = args.rank
    if getattr(args, "m", None):
        cfg.multiplicities = parse_vector(args.m, "m")
    if getattr(args, "ell", None) is not None:
        cfg.ell = args.ell
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "identity", None):
        cfg.identities = list(args.identity)
    if getattr(args, "q0", None):
        cfg.q0 = parse_rational(args.q0)
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    for attr, name in (("lam", "lambda"), ("mu", "mu"), ("xi", "xi")):
        v = getattr(args, attr, None)
        if v:
            setattr(cfg, attr, parse_vector(v, name))
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.command == "list-identities":
        return cmd_list()
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "construct":
        return cmd_construct(cfg)
    if args.command == "describe-datum":
        return cmd_describe(cfg)
    return cmd_verify(cfg)


if __name__ == "__main__":
    sys.exit(main())
