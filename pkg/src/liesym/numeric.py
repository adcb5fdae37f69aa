"""Numeric evaluation, seeded sampling, and randomized equivalence.

Expressions compile to Python callables once per (expression, backend)
pair.  Backends: double (float/complex) and dd (mpmath real/complex at a
fixed 106-bit precision, the double-double significand budget).
Evaluation order follows the stored tree, so results are deterministic
for a fixed backend.
"""

from __future__ import annotations

import cmath
import math
import random
from fractions import Fraction

import mpmath

from .expr import (
    Add, EvalDomainError, Expr, ExprError, Fun, Jet, Mul, Pow, Rat, Sym,
    Ufunc, free_jets, free_symbols, ufunc_names,
)

DD_PREC = 106


class SamplingError(ExprError):
    pass


def _rp_real(b, p, q):
    """Real-branch rational power b**(p/q)."""
    if b == 0:
        if p > 0:
            return 0.0
        raise EvalDomainError("zero to a non-positive power")
    if b < 0:
        if q % 2 == 0:
            raise EvalDomainError("even root of a negative value")
        s = -1.0 if p % 2 else 1.0
        return s * (-b) ** (p / q)
    return b ** (p / q)


def _rp_complex(b, p, q):
    if b == 0:
        if p > 0:
            return 0j
        raise EvalDomainError("zero to a non-positive power")
    return b ** (p / q)


def _mp_rp_real(b, p, q):
    if b == 0:
        if p > 0:
            return mpmath.mpf(0)
        raise EvalDomainError("zero to a non-positive power")
    if b < 0:
        if q % 2 == 0:
            raise EvalDomainError("even root of a negative value")
        s = -1 if p % 2 else 1
        return s * mpmath.power(-b, mpmath.mpf(p) / q)
    return mpmath.power(b, mpmath.mpf(p) / q)


def _mp_rp_complex(b, p, q):
    if b == 0:
        if p > 0:
            return mpmath.mpc(0)
        raise EvalDomainError("zero to a non-positive power")
    return mpmath.power(b, mpmath.mpf(p) / q)


def _sech(v):
    try:
        return 1.0 / math.cosh(v)
    except OverflowError:
        return 0.0  # sech underflows long before cosh loses meaning


def _csech(v):
    try:
        return 1.0 / cmath.cosh(v)
    except OverflowError:
        return 0.0


def _mp_sech(v):
    return 1 / mpmath.cosh(v)


_BACKENDS = {
    ("double", False): dict(
        tanh=math.tanh, sech=_sech, sinh=math.sinh, cosh=math.cosh,
        exp=math.exp, rp=_rp_real, const=float,
    ),
    ("double", True): dict(
        tanh=cmath.tanh, sech=_csech, sinh=cmath.sinh, cosh=cmath.cosh,
        exp=cmath.exp, rp=_rp_complex, const=complex,
    ),
    ("dd", False): dict(
        tanh=mpmath.tanh, sech=_mp_sech, sinh=mpmath.sinh, cosh=mpmath.cosh,
        exp=mpmath.exp, rp=_mp_rp_real,
        const=lambda c: mpmath.mpf(c.numerator) / c.denominator,
    ),
    ("dd", True): dict(
        tanh=mpmath.tanh, sech=_mp_sech, sinh=mpmath.sinh, cosh=mpmath.cosh,
        exp=mpmath.exp, rp=_mp_rp_complex,
        const=lambda c: mpmath.mpf(c.numerator) / c.denominator,
    ),
}

_compiled: dict = {}


def _emit(e: Expr, names: dict, consts: list, backend: dict) -> str:
    t = type(e)
    if t is Rat:
        consts.append(backend["const"](Fraction(e.value)))
        return f"C[{len(consts) - 1}]"
    if t is Sym:
        return names[e]
    if t is Jet:
        raise EvalDomainError(f"cannot evaluate jet variable {e.dep}")
    if t is Ufunc:
        raise EvalDomainError(f"cannot evaluate unknown function {e.name}")
    if t is Fun:
        return f"{e.fn}({_emit(e.arg, names, consts, backend)})"
    if t is Pow:
        b = _emit(e.base, names, consts, backend)
        q = e.exp
        if q.denominator == 1:
            return f"({b})**({q.numerator})"
        return f"rp({b},{q.numerator},{q.denominator})"
    if t is Mul:
        return "*".join(f"({_emit(f, names, consts, backend)})" for f in e.factors)
    if t is Add:
        return "+".join(f"({_emit(x, names, consts, backend)})" for x in e.terms)
    raise ExprError(f"cannot compile {e!r}")


def compile_expr(e: Expr, precision: str = "double", complex_mode: bool = False):
    """Compile to (fn, symbol order); fn takes one positional value per symbol."""
    key = (e, precision, complex_mode)
    got = _compiled.get(key)
    if got is not None:
        return got
    backend = _BACKENDS[(precision, complex_mode)]
    syms = sorted(free_symbols(e), key=lambda s: s.name)
    names = {s: f"v{i}" for i, s in enumerate(syms)}
    consts: list = []
    if precision == "dd":
        with mpmath.workprec(DD_PREC):
            body = _emit(e, names, consts, backend)
    else:
        body = _emit(e, names, consts, backend)
    src = f"def _f({', '.join(names[s] for s in syms)}):\n    return {body}\n"
    ns = dict(backend)
    ns["C"] = consts
    exec(src, ns)
    fn = ns["_f"]
    _compiled[key] = (fn, tuple(syms))
    return fn, tuple(syms)


def eval_numeric(e: Expr, env: dict, precision: str = "double",
                 complex_mode: bool = False):
    """Evaluate at a point; env maps symbols (or their names) to numbers."""
    if free_jets(e):
        raise EvalDomainError("expression contains jet variables")
    if ufunc_names(e):
        raise EvalDomainError("expression contains unbound unknown functions")
    fn, syms = compile_expr(e, precision, complex_mode)
    vals = []
    for s in syms:
        if s in env:
            vals.append(env[s])
        elif s.name in env:
            vals.append(env[s.name])
        else:
            raise EvalDomainError(f"unbound symbol {s.name!r}")
    try:
        if precision == "dd":
            with mpmath.workprec(DD_PREC):
                return fn(*vals)
        return fn(*vals)
    except (ZeroDivisionError, OverflowError) as exc:
        raise EvalDomainError(str(exc)) from None
    except ValueError as exc:
        raise EvalDomainError(str(exc)) from None


def sample_point(syms, rng: random.Random, box=(-2.0, 2.0)) -> dict:
    lo, hi = box
    return {s: rng.uniform(lo, hi) for s in syms}


def random_equiv(e1: Expr, e2: Expr, trials: int = 64, tol: float = 1e-9,
                 seed: int = 0, box=(-2.0, 2.0)) -> bool:
    """Numeric equivalence at seeded sample points.

    True iff |e1-e2| <= tol*(1+max(|e1|,|e2|)) at every point that
    evaluates cleanly; raises SamplingError when every point hits a
    singularity.
    """
    syms = sorted(free_symbols(e1) | free_symbols(e2), key=lambda s: s.name)
    rng = random.Random(seed)
    good = 0
    for _ in range(trials * 4):
        if good >= trials:
            break
        env = sample_point(syms, rng, box)
        try:
            v1 = eval_numeric(e1, env)
            v2 = eval_numeric(e2, env)
        except EvalDomainError:
            continue
        if any(abs(v) > 1e12 for v in (v1, v2)):
            continue
        good += 1
        if abs(v1 - v2) > tol * (1 + max(abs(v1), abs(v2))):
            return False
    if good == 0:
        raise SamplingError("all sampled points hit singularities")
    return True
