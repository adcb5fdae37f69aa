"""Residual verification of cataloged solutions, reductions and ODE claims.

Symbolic verdicts come from the exact normal form; every claim is also
sampled numerically at seeded points.  Failures are data (reports), not
exceptions.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .catalog import Record, record_context, solution_context, undeclared_divisors
from .expr import (
    Add, EvalDomainError, Expr, Sym, add, diff_n, free_jets,
    free_symbols, jet, mul, rat, substitute, symbol,
)
from .jets import PDE
from .normal import as_expr, canonical, is_zero, nf_div_exact, normalize
from .numeric import eval_numeric
from .parse import ParseContext, parse
from . import weierstrass as wz


class ResidualReport:
    def __init__(self, symbolic, max_rel, samples, precision, detail=None):
        self.symbolic = symbolic          # "zero" | "nonzero" | "undecided"
        self.max_rel = max_rel
        self.samples = samples
        self.precision = precision
        self.detail = detail or {}

    @property
    def ok(self) -> bool:
        return self.symbolic == "zero"

    def __repr__(self):
        return (f"<residual {self.symbolic}; max_rel={self.max_rel:.3e} "
                f"over {self.samples} pts ({self.precision})>")


def _jet_bindings_for(delta: Expr, f: Expr, variables, dep: str) -> dict:
    """Bind every jet of dep in delta to the matching derivative of f."""
    var_by_name = {v.name: v for v in variables}
    bindings = {}
    for j in free_jets(delta):
        if j.dep != dep:
            continue
        e = f
        for name, count in j.idx:
            e = diff_n(e, var_by_name[name], count)
        bindings[j] = e
    return bindings


def substituted_delta(f: Expr, pde: PDE) -> Expr:
    return substitute(pde.delta, _jet_bindings_for(pde.delta, f, pde.vars, pde.dep))


def _numeric_residual(terms, variables, params, points, tol, seed, precision,
                      complex_mode=False, box=(0.5, 2.5)):
    """Max of |sum terms| / (1 + sum |terms|) over seeded sample points."""
    rng = random.Random(seed)
    syms = sorted(set().union(*(free_symbols(t) for t in terms)),
                  key=lambda s: s.name)
    fixed = {}
    for s in syms:
        if s.name in params:
            fixed[s] = params[s.name]
        elif s.name == "i":
            fixed[s] = 1j
    free = [s for s in syms if s not in fixed]
    worst = 0.0
    good = 0
    attempts = 0
    while good < points and attempts < points * 20:
        attempts += 1
        env = dict(fixed)
        for s in free:
            env[s] = rng.uniform(*box) * rng.choice((1.0, -1.0))
        try:
            vals = [eval_numeric(t, env, precision, complex_mode) for t in terms]
        except EvalDomainError:
            continue
        scale = sum(abs(v) for v in vals)
        if scale > 1e12:
            continue
        rel = float(abs(sum(vals)) / (1 + scale))
        worst = max(worst, rel)
        good += 1
    if good == 0:
        raise EvalDomainError("all residual sample points hit singularities")
    return worst, good


def _top_terms(e: Expr):
    return list(e.terms) if type(e) is Add else [e]


def residual(f: Expr, pde: PDE, params=None, points: int = 100,
             tol: float = 1e-9, seed: int = 0, precision: str = "double",
             complex_mode: bool = False) -> ResidualReport:
    """Substitute f into the equation; decide symbolically, sample numerically."""
    delta_sub = substituted_delta(f, pde)
    n = normalize(delta_sub)
    symbolic = "zero" if n.is_zero() else "undecided"
    terms = [substitute(term,
                        _jet_bindings_for(term, f, pde.vars, pde.dep))
             for term in _top_terms(pde.delta)]
    worst, good = _numeric_residual(terms, pde.vars, params or {}, points, tol,
                                    seed, precision, complex_mode)
    if symbolic == "undecided":
        symbolic = "nonzero" if worst > tol else "undecided"
    return ResidualReport(symbolic, worst, good, precision)


def residual_condition(f: Expr, pde: PDE, condition: Expr):
    """Exact multiplier m with residual == m * condition, or None."""
    delta_sub = substituted_delta(f, pde)
    return nf_div_exact(normalize(delta_sub), normalize(condition))


# ---------------------------------------------------------------------------
# reduced equations (ODE / PDE claims with an explicit unknown)

def ode_residual(solution: Expr, equation: Expr, variables, dep: str,
                 params=None, points: int = 60, tol: float = 1e-9,
                 seed: int = 0, precision: str = "double") -> ResidualReport:
    bindings = _jet_bindings_for(equation, solution, variables, dep)
    res = substitute(equation, bindings)
    n = normalize(res)
    symbolic = "zero" if n.is_zero() else "undecided"
    terms = [substitute(t, bindings) for t in _top_terms(equation)]
    if any(_has_ufunc(t) or free_jets(t) for t in terms):
        # formal unknown functions cannot be sampled numerically
        return ResidualReport(symbolic, 0.0, 0, precision,
                              {"formal": True})
    worst, good = _numeric_residual(terms, variables, params or {}, points,
                                    tol, seed, precision)
    if symbolic == "undecided":
        symbolic = "nonzero" if worst > tol else "undecided"
    return ResidualReport(symbolic, worst, good, precision)


def ode_condition(solution: Expr, equation: Expr, variables, dep: str,
                  condition: Expr):
    bindings = _jet_bindings_for(equation, solution, variables, dep)
    res = substitute(equation, bindings)
    return nf_div_exact(normalize(res), normalize(condition))


def _has_ufunc(e: Expr) -> bool:
    from .expr import ufunc_names
    return bool(ufunc_names(e))


# ---------------------------------------------------------------------------
# similarity-reduction checking

class ReductionReport:
    def __init__(self, matches, multiplier=None, leftover=None, numeric=False):
        self.matches = matches
        self.multiplier = multiplier      # canonical Expr or None
        self.leftover = leftover
        self.numeric = numeric            # proportionality confirmed by sampling

    def __repr__(self):
        if self.matches and self.numeric:
            return "<reduction ok, multiplier confirmed numerically>"
        if self.matches:
            return f"<reduction ok, multiplier {self.multiplier}>"
        return "<reduction mismatch>"


class ReductionAnsatz:
    """u = prefactor * F(new vars) + shift, with inverse variable maps."""

    def __init__(self, rec: Record, pde: PDE):
        self.rec = rec
        self.new_vars = tuple(rec.get("vars").split())
        self.unknown = rec.get("unknown", "F")
        src_vars = rec.get("eqvars")
        if src_vars:
            src_ctx = ParseContext(indep=src_vars.split(),
                                   deps=(rec.get("eqdep"),))
            self.equation = parse(rec.get("equation"), src_ctx)
            self.old_vars = tuple(src_ctx.symbol(v) for v in src_vars.split())
            self.old_dep = rec.get("eqdep")
        else:
            self.equation = pde.delta
            self.old_vars = pde.vars
            self.old_dep = pde.dep
        old_names = [v.name for v in self.old_vars]
        self.octx = ParseContext(indep=old_names, deps=(self.old_dep,))
        mixed = ParseContext(indep=tuple(old_names) + self.new_vars,
                             deps=(self.old_dep,))
        self.defs = [(n, parse(txt, self.octx)) for n, txt in rec.pairs("newvar")]
        if tuple(n for n, _ in self.defs) != self.new_vars:
            raise ValueError("newvar lines must match the vars order")
        self.back = {mixed.symbol(n): parse(txt, mixed) for n, txt in rec.pairs("back")}
        self.prefactor = parse(rec.get("prefactor", "1"), self.octx)
        self.shift = parse(rec.get("shift", "0"), self.octx)
        nctx = ParseContext(indep=self.new_vars, deps=(self.unknown,))
        self.claim = parse(rec.get("reduced"), nctx)
        self.new_syms = tuple(nctx.symbol(v) for v in self.new_vars)

    def ansatz_expr(self) -> Expr:
        from .expr import Ufunc
        f = Ufunc(self.unknown, tuple(e for _, e in self.defs))
        return add(mul(self.prefactor, f), self.shift)


def check_reduction(ans: ReductionAnsatz, tol: float = 1e-9) -> ReductionReport:
    """Substitute the ansatz, re-express in similarity variables, compare.

    The multiplier comes out of exact normal-form division; when the
    quotient is not a single monomial the proportionality is confirmed by
    seeded sampling instead (the ratio must not depend on the jet values).
    """
    u_expr = ans.ansatz_expr()
    bindings = _jet_bindings_for(ans.equation, u_expr, ans.old_vars, ans.old_dep)
    res = substitute(ans.equation, bindings)
    res = substitute(res, ans.back)
    res = _ufunc_slots_to_jets(res, ans.unknown, ans.new_syms)
    n_res = normalize(res)
    n_claim = normalize(ans.claim)
    if n_res.is_zero():
        return ReductionReport(False, leftover="substitution vanished identically")
    m = nf_div_exact(n_res, n_claim)
    if m is not None and not m.is_zero():
        multiplier = as_expr(m)
        if not any(j.dep == ans.unknown for j in free_jets(multiplier)):
            return ReductionReport(True, multiplier=multiplier)
    if _proportional_by_sampling(res, ans.claim, ans.unknown, tol):
        return ReductionReport(True, numeric=True)
    return ReductionReport(False, leftover=canonical(res))


def _jets_to_symbols(e: Expr):
    """Replace jet variables by fresh symbols so the tree can be evaluated."""
    mapping = {}
    for k, j in enumerate(sorted(free_jets(e), key=lambda j: (j.dep, j.idx))):
        mapping[j] = symbol(f"jv{j.dep}{k}")
    return substitute(e, mapping), mapping


def _proportional_by_sampling(res: Expr, claim: Expr, unknown: str,
                              tol: float, seed: int = 0) -> bool:
    """res == (jet-independent factor) * claim at seeded sample points.

    For several base points the jets are resampled; the ratio res/claim
    must stay fixed while jets vary, and must be nonzero somewhere.
    """
    all_jets = {j for j in free_jets(res) | free_jets(claim)}
    sub = {j: symbol(f"jv{j.dep}{k}")
           for k, j in enumerate(sorted(all_jets, key=lambda j: (j.dep, j.idx)))}
    res_s = substitute(res, sub)
    claim_s = substitute(claim, sub)
    jet_syms = set(sub.values())
    base_syms = sorted((free_symbols(res_s) | free_symbols(claim_s)) - jet_syms,
                       key=lambda s: s.name)
    rng = random.Random(seed)
    confirmed = 0
    for _ in range(80):
        if confirmed >= 8:
            return True
        env = {s: rng.uniform(0.4, 1.7) * rng.choice((1.0, -1.0))
               for s in base_syms}
        ratios = []
        try:
            for _ in range(4):
                for s in jet_syms:
                    env[s] = rng.uniform(0.4, 1.7) * rng.choice((1.0, -1.0))
                cv = eval_numeric(claim_s, env)
                rv = eval_numeric(res_s, env)
                if abs(cv) < 1e-6:
                    raise EvalDomainError("claim too small at sample")
                ratios.append(rv / cv)
        except EvalDomainError:
            continue
        spread = max(ratios) - min(ratios)
        if abs(ratios[0]) < 1e-9 or spread > tol * (1 + abs(ratios[0])) * 100:
            return False
        confirmed += 1
    return confirmed >= 4


def _ufunc_slots_to_jets(e: Expr, name: str, new_syms) -> Expr:
    """Replace slot derivatives F^{(k...)}(args) by jets once args are the
    similarity variables themselves."""
    from .expr import Fun, Mul, Pow, Ufunc

    def walk(x: Expr) -> Expr:
        t = type(x)
        if t is Ufunc and x.name == name:
            for a, s in zip(x.args, new_syms):
                if not is_zero(add(a, mul(rat(-1), s))):
                    raise ValueError(
                        f"unknown-function argument {a} is not similarity "
                        f"variable {s.name} after the inverse substitution"
                    )
            idx = {s.name: k for s, k in zip(new_syms, x.dorders) if k}
            return jet(name, idx)
        if t is Add:
            return add(*(walk(c) for c in x.terms))
        if t is Mul:
            return mul(*(walk(c) for c in x.factors))
        if t is Pow:
            from .expr import pow_
            return pow_(walk(x.base), x.exp)
        if t is Fun:
            from .expr import fun
            return fun(x.fn, walk(x.arg))
        return x

    return walk(e)


# ---------------------------------------------------------------------------
# Weierstrass claims

def weierstrass_claim_residual(rec: Record, points: int = 40, seed: int = 0):
    """Max relative residual of the reduced ODE for a Weierstrass record.

    form `p`:    f = mu^-1 wp(mu (q + c1); 0, c2) against 6 f^2 + a f'' = 0
    form `zeta`: H = P zeta_w(mu (q + c1); 0, c2) + c3 against
                 6 H'^2 + a H''' = 0, written via wp as
                 6 P^2 mu^2 wp^2 - a P mu^3 wp'' = 0.
    Derivatives of wp come from extrapolated finite differences.
    """
    import math
    a = float(Fraction(rec.get("a")))
    c1 = float(Fraction(rec.get("c1", "0")))
    g3 = float(Fraction(rec.get("c2", "1")))
    inv = -1.0 / a
    mu = math.copysign(abs(inv) ** (1.0 / 3.0), inv)  # real cube root
    form = rec.get("form", "p")
    rng = random.Random(seed)
    worst = 0.0
    good = 0
    attempts = 0
    import mpmath
    while good < points and attempts < points * 30:
        attempts += 1
        q = rng.uniform(0.15, 1.6) * rng.choice((1.0, -1.0))
        arg = mu * (q + c1)
        try:
            p = wz.weierstrass_p(arg, g3, "dd")
        except EvalDomainError:
            continue
        if abs(p) > 50:
            continue
        if form == "p":
            f = p / mu
            with mpmath.workprec(106):
                f2 = mu * wz.second_difference(
                    lambda w: wz.weierstrass_p(w, g3, "dd"),
                    mpmath.mpc(arg), mpmath.mpf(1e-5))
            resv = 6 * f * f + a * f2
            scale = abs(6 * f * f) + abs(a * f2)
        else:
            if rec.get("prefactor") == "a*mu":
                P = a * mu
            elif rec.get("prefactor") == "a/mu":
                P = a / mu
            else:
                raise ValueError("zeta record needs prefactor a*mu or a/mu")
            with mpmath.workprec(106):
                p2 = wz.second_difference(
                    lambda w: wz.weierstrass_p(w, g3, "dd"),
                    mpmath.mpc(arg), mpmath.mpf(1e-5))
            h1sq = (P * mu * p) ** 2 * 6
            ah3 = -a * P * mu ** 3 * p2
            resv = h1sq + ah3
            scale = abs(h1sq) + abs(ah3)
        worst = max(worst, float(abs(resv) / (1 + scale)))
        good += 1
    if good == 0:
        raise EvalDomainError("all Weierstrass sample points rejected")
    return worst, good


# ---------------------------------------------------------------------------
# whole-catalog driver

class CatalogResult:
    def __init__(self, name, kind, status, expected_status, detail=""):
        self.name = name
        self.kind = kind
        self.status = status
        self.expected_status = expected_status
        self.detail = detail

    @property
    def ok(self) -> bool:
        return self.status == self.expected_status

    def row(self):
        return (self.name, self.kind, self.status, self.detail)


def _expected_status(rec: Record) -> str:
    if rec.expected == "conditional" or rec.expected == "mismatch":
        return "flagged"
    if rec.name.endswith("-corrected"):
        return "verified-after-correction"
    return "verified"


def verify_record(rec: Record, pde: PDE, points=100, tol=1e-9, seed=0,
                  precision="double") -> CatalogResult:
    kind = rec.kind
    expected = _expected_status(rec)
    try:
        if kind in ("solution", "solution-complex"):
            ctx = solution_context()
            f = parse(rec.get("claim"), ctx)
            bad = undeclared_divisors(f, rec.nonzero(), ("x", "y", "z", "t", "i"))
            detail_extra = f" undeclared-divisors={','.join(bad)}" if bad else ""
            cmplx = kind == "solution-complex"
            if rec.expected == "conditional":
                cond = parse(rec.get("condition"), ctx)
                m = residual_condition(f, pde, cond)
                if m is not None and not m.is_zero():
                    return CatalogResult(
                        rec.name, kind, "flagged", expected,
                        f"residual = ({canonical(as_expr(m))}) * ({rec.get('condition')})"
                        + detail_extra)
                return CatalogResult(rec.name, kind, "falsified", expected,
                                     "residual not proportional to condition")
            rep = residual(f, pde, rec.params(), points, tol, seed, precision,
                           complex_mode=cmplx)
            if rep.symbolic == "zero" and rep.max_rel < tol:
                return CatalogResult(rec.name, kind, expected, expected,
                                     f"max_rel={rep.max_rel:.2e}" + detail_extra)
            if cmplx and rep.max_rel < tol:
                # complex claims are accepted on numeric evidence alone
                return CatalogResult(rec.name, kind, expected, expected,
                                     f"numeric-only max_rel={rep.max_rel:.2e}")
            return CatalogResult(rec.name, kind, "falsified", expected,
                                 f"symbolic={rep.symbolic} max_rel={rep.max_rel:.2e}")
        if kind == "ode":
            ctx = record_context(rec)
            variables = tuple(ctx.symbol(v) for v in ctx.indep)
            eqn = parse(rec.get("equation"), ctx)
            sol = parse(rec.get("solution"), ctx)
            if rec.expected == "conditional":
                cond = parse(rec.get("condition"), ctx)
                m = ode_condition(sol, eqn, variables, ctx.deps[0], cond)
                if m is not None and not m.is_zero():
                    return CatalogResult(
                        rec.name, kind, "flagged", expected,
                        f"residual = ({canonical(as_expr(m))}) * ({rec.get('condition')})")
                return CatalogResult(rec.name, kind, "falsified", expected,
                                     "residual not proportional to condition")
            rep = ode_residual(sol, eqn, variables, ctx.deps[0], rec.params(),
                               tol=tol, seed=seed, precision=precision)
            if rep.symbolic == "zero" and rep.max_rel < tol:
                return CatalogResult(rec.name, kind, expected, expected,
                                     f"max_rel={rep.max_rel:.2e}")
            return CatalogResult(rec.name, kind, "falsified", expected,
                                 f"symbolic={rep.symbolic} max_rel={rep.max_rel:.2e}")
        if kind == "reduction":
            ans = ReductionAnsatz(rec, pde)
            rep = check_reduction(ans)
            if rec.expected == "mismatch":
                if not rep.matches:
                    return CatalogResult(rec.name, kind, "flagged", expected,
                                         "does not reproduce the claimed equation")
                return CatalogResult(rec.name, kind, "falsified", expected,
                                     f"unexpected match, multiplier {rep.multiplier}")
            if rep.matches:
                return CatalogResult(rec.name, kind, expected, expected,
                                     f"multiplier = {rep.multiplier}")
            return CatalogResult(rec.name, kind, "falsified", expected,
                                 f"leftover: {rep.leftover}")
        if kind == "weierstrass":
            worst, good = weierstrass_claim_residual(rec, points=min(points, 40),
                                                     seed=seed)
            w_tol = 1e-8
            if rec.expected == "mismatch":
                if worst > w_tol:
                    return CatalogResult(rec.name, kind, "flagged", expected,
                                         f"max_rel={worst:.2e} (claim fails as printed)")
                return CatalogResult(rec.name, kind, "falsified", expected,
                                     "unexpectedly satisfies the equation")
            if worst <= w_tol:
                return CatalogResult(rec.name, kind, expected, expected,
                                     f"max_rel={worst:.2e} over {good} pts")
            return CatalogResult(rec.name, kind, "falsified", expected,
                                 f"max_rel={worst:.2e}")
        return CatalogResult(rec.name, kind, "falsified", expected,
                             f"unknown record kind {kind!r}")
    except Exception as exc:  # report, never crash the table
        return CatalogResult(rec.name, kind, "error", expected, str(exc))


def verify_catalog(records, pde: PDE, points=100, tol=1e-9, seed=0,
                   precision="double"):
    return [verify_record(r, pde, points, tol, seed, precision) for r in records]
