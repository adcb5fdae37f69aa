"""Immutable symbolic expression trees with exact rational coefficients.

Node kinds: rational constants, symbols, jet variables (derivative
coordinates of a dependent variable), unknown-function applications with
formal slot derivatives, a fixed set of elementary functions, rational
powers, and flattened sums/products.  Trees never mutate after
construction.  The smart constructors do the cheap canonical work
(flattening, like-term merging, a fixed total order on node shapes);
anything that expands goes through normal.normalize.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache


class ExprError(Exception):
    pass


class CyclicBindingError(ExprError):
    pass


class ResourceLimitError(ExprError):
    pass


class EvalDomainError(ExprError):
    pass


# symbol kinds
KIND_INDEP = "independent-variable"
KIND_PARAM = "parameter"
KIND_GROUP = "group-parameter"
KIND_ANSATZ = "ansatz-coefficient"

# elementary functions (sqrt is folded into rational powers at parse time)
ELEMENTARY = ("tanh", "sech", "sinh", "cosh", "exp")

# preferred display/storage order for jet indices
_VAR_RANK = {"x": 0, "y": 1, "z": 2, "t": 3, "X": 0, "Y": 1, "Z": 2, "T": 3}


def _idx_sort_key(pair):
    return (_VAR_RANK.get(pair[0], 4), pair[0])


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Rat):
        return v.value
    raise ExprError(f"not an exact rational: {v!r}")


class Expr:
    __slots__ = ("_h",)

    def __hash__(self):
        return self._h

    # arithmetic sugar; accepts ints and Fractions on either side
    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(Rat(Fraction(-1)), _coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), mul(Rat(Fraction(-1)), self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, pow_(_coerce(other), Fraction(-1)))

    def __rtruediv__(self, other):
        return mul(_coerce(other), pow_(self, Fraction(-1)))

    def __neg__(self):
        return mul(Rat(Fraction(-1)), self)

    def __pow__(self, exponent):
        return pow_(self, as_fraction(exponent))

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Rat(Fraction(v))
    raise ExprError(f"cannot coerce {v!r} to Expr")


class Rat(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        v = Fraction(value)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "_h", hash(("R", v)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Rat and self.value == other.value)

    __hash__ = Expr.__hash__


class Sym(Expr):
    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: str = KIND_PARAM):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "_h", hash(("S", name)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Sym and self.name == other.name)

    __hash__ = Expr.__hash__


class Jet(Expr):
    """Derivative coordinate dep_J; idx is a sorted tuple of (var, count)."""

    __slots__ = ("dep", "idx")

    def __init__(self, dep: str, idx=()):
        idx = tuple(sorted(((v, int(c)) for v, c in idx if c), key=_idx_sort_key))
        object.__setattr__(self, "dep", dep)
        object.__setattr__(self, "idx", idx)
        object.__setattr__(self, "_h", hash(("J", dep, idx)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (
            type(other) is Jet and self.dep == other.dep and self.idx == other.idx
        )

    __hash__ = Expr.__hash__

    @property
    def order(self) -> int:
        return sum(c for _, c in self.idx)

    def lifted(self, var: str, by: int = 1) -> "Jet":
        d = dict(self.idx)
        d[var] = d.get(var, 0) + by
        return Jet(self.dep, d.items())


class Ufunc(Expr):
    """Unknown-function application with formal slot-derivative orders."""

    __slots__ = ("name", "args", "dorders")

    def __init__(self, name: str, args, dorders=None):
        args = tuple(args)
        if dorders is None:
            dorders = (0,) * len(args)
        dorders = tuple(int(k) for k in dorders)
        if len(dorders) != len(args):
            raise ExprError("slot-derivative orders must match arity")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "dorders", dorders)
        object.__setattr__(self, "_h", hash(("U", name, dorders, args)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (
            type(other) is Ufunc
            and self.name == other.name
            and self.dorders == other.dorders
            and self.args == other.args
        )

    __hash__ = Expr.__hash__


class Fun(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        if fn not in ELEMENTARY:
            raise ExprError(f"unknown elementary function {fn!r}")
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_h", hash(("F", fn, arg)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (
            type(other) is Fun and self.fn == other.fn and self.arg == other.arg
        )

    __hash__ = Expr.__hash__


class Pow(Expr):
    """base raised to a rational exponent (never 0 or 1)."""

    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Fraction):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "_h", hash(("P", base, exp)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (
            type(other) is Pow and self.exp == other.exp and self.base == other.base
        )

    __hash__ = Expr.__hash__


class Mul(Expr):
    """Flattened product; a rational coefficient, if any, sits first."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        factors = tuple(factors)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "_h", hash(("M", factors)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Mul and self.factors == other.factors)

    __hash__ = Expr.__hash__


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        terms = tuple(terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_h", hash(("A", terms)))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Add and self.terms == other.terms)

    __hash__ = Expr.__hash__


ZERO = Rat(0)
ONE = Rat(1)
MINUS_ONE = Rat(-1)


# ---------------------------------------------------------------------------
# total order on node shapes

@lru_cache(maxsize=None)
def skey(e: Expr):
    t = type(e)
    if t is Rat:
        return (0, e.value)
    if t is Sym:
        return (1, e.name)
    if t is Jet:
        return (2, e.dep, e.idx)
    if t is Ufunc:
        return (3, e.name, e.dorders, tuple(skey(a) for a in e.args))
    if t is Fun:
        return (4, e.fn, skey(e.arg))
    if t is Pow:
        return (5, skey(e.base), e.exp)
    if t is Mul:
        return (6, tuple(skey(f) for f in e.factors))
    if t is Add:
        return (7, tuple(skey(x) for x in e.terms))
    raise ExprError(f"unknown node {e!r}")


def _base_exp(e: Expr):
    if type(e) is Pow:
        return e.base, e.exp
    return e, Fraction(1)


def _coeff_rest(e: Expr):
    """Split a term into (rational coefficient, remaining factor or None)."""
    t = type(e)
    if t is Rat:
        return e.value, None
    if t is Mul and type(e.factors[0]) is Rat:
        rest = e.factors[1:]
        return e.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), e


# ---------------------------------------------------------------------------
# smart constructors

def rat(p, q=None) -> Rat:
    return Rat(Fraction(p) if q is None else Fraction(p, q))


def add(*terms) -> Expr:
    acc: dict = {}
    const = Fraction(0)
    stack = list(terms)
    while stack:
        e = stack.pop()
        if type(e) is Add:
            stack.extend(e.terms)
            continue
        c, rest = _coeff_rest(e)
        if rest is None:
            const += c
        else:
            acc[rest] = acc.get(rest, Fraction(0)) + c
    out = []
    for restx in sorted(acc, key=skey):
        c = acc[restx]
        if c == 0:
            continue
        out.append(restx if c == 1 else mul(Rat(c), restx))
    if const != 0 or not out:
        out.insert(0, Rat(const))
    if len(out) == 1:
        return out[0]
    return Add(out)


def mul(*factors) -> Expr:
    coeff = Fraction(1)
    powers: dict = {}
    order: list = []
    stack = list(reversed(factors))
    while stack:
        e = stack.pop()
        t = type(e)
        if t is Mul:
            stack.extend(reversed(e.factors))
            continue
        if t is Rat:
            coeff *= e.value
            continue
        b, q = _base_exp(e)
        if b in powers:
            powers[b] += q
        else:
            powers[b] = q
            order.append(b)
    if coeff == 0:
        return ZERO
    out = []
    redo = False
    for b in sorted(order, key=skey):
        q = powers[b]
        if q == 0:
            continue
        p = pow_(b, q)
        # pow_ may collapse (2^2 -> 4) or distribute ((x*y)^2 -> x^2*y^2)
        if type(p) is Rat:
            coeff *= p.value
        else:
            if type(p) is Mul:
                redo = True
            out.append(p)
    if coeff == 0:
        return ZERO
    if redo:
        return mul(Rat(coeff), *out)
    if not out:
        return Rat(coeff)
    if coeff != 1:
        out.insert(0, Rat(coeff))
    if len(out) == 1:
        return out[0]
    return Mul(out)


def _int_nth_root(n: int, k: int):
    """Exact k-th root of n >= 0, or None."""
    if n in (0, 1):
        return n
    lo, hi = 0, 1 << ((n.bit_length() + k - 1) // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** k == n else None


def _rat_exact_pow(v: Fraction, q: Fraction):
    """v**q as an exact Fraction if one exists (real branch), else None."""
    if v == 0:
        if q > 0:
            return Fraction(0)
        raise EvalDomainError("0 raised to a non-positive power")
    if q.denominator == 1:
        return v ** q.numerator
    sign = 1
    if v < 0:
        if q.denominator % 2 == 0:
            return None  # even root of a negative rational: stays symbolic
        sign = -1 if q.numerator % 2 else 1
        v = -v
    rn = _int_nth_root(v.numerator, q.denominator)
    rd = _int_nth_root(v.denominator, q.denominator)
    if rn is None or rd is None:
        return None
    return sign * Fraction(rn, rd) ** q.numerator


def pow_(base: Expr, exp) -> Expr:
    exp = as_fraction(exp)
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    t = type(base)
    if t is Rat:
        ex = _rat_exact_pow(base.value, exp)
        if ex is not None:
            return Rat(ex)
        return Pow(base, exp)
    if t is Pow and exp.denominator == 1:
        return pow_(base.base, base.exp * exp)
    if t is Mul and exp.denominator == 1:
        return mul(*(pow_(f, exp) for f in base.factors))
    return Pow(base, exp)


_FUN_AT_ZERO = {"tanh": ZERO, "sech": ONE, "sinh": ZERO, "cosh": ONE, "exp": ONE}


def fun(fn: str, arg: Expr) -> Expr:
    if type(arg) is Rat and arg.value == 0:
        return _FUN_AT_ZERO[fn]
    return Fun(fn, arg)


def jet(dep: str, idx=()) -> Jet:
    if isinstance(idx, dict):
        idx = idx.items()
    elif isinstance(idx, str):
        d: dict = {}
        for ch in idx:
            d[ch] = d.get(ch, 0) + 1
        idx = d.items()
    return Jet(dep, idx)


def ufunc(name: str, args, dorders=None) -> Ufunc:
    return Ufunc(name, args, dorders)


# ---------------------------------------------------------------------------
# symbol session registry (names unique per session, kind fixed at creation)

_registry: dict = {}


def symbol(name: str, kind: str = KIND_PARAM) -> Sym:
    known = _registry.get(name)
    if known is None:
        s = Sym(name, kind)
        _registry[name] = s
        return s
    if known.kind != kind:
        raise ExprError(
            f"symbol {name!r} already registered with kind {known.kind!r}"
        )
    return known


def reset_session():
    _registry.clear()
    skey.cache_clear()
    free_symbols.cache_clear()
    free_jets.cache_clear()
    ufunc_names.cache_clear()


# ---------------------------------------------------------------------------
# structure queries

@lru_cache(maxsize=None)
def free_symbols(e: Expr) -> frozenset:
    t = type(e)
    if t is Sym:
        return frozenset((e,))
    if t in (Rat, Jet):
        return frozenset()
    if t is Fun:
        return free_symbols(e.arg)
    if t is Pow:
        return free_symbols(e.base)
    if t is Ufunc:
        out = frozenset()
        for a in e.args:
            out |= free_symbols(a)
        return out
    out = frozenset()
    for c in e.terms if t is Add else e.factors:
        out |= free_symbols(c)
    return out


@lru_cache(maxsize=None)
def free_jets(e: Expr) -> frozenset:
    t = type(e)
    if t is Jet:
        return frozenset((e,))
    if t in (Rat, Sym):
        return frozenset()
    if t is Fun:
        return free_jets(e.arg)
    if t is Pow:
        return free_jets(e.base)
    if t is Ufunc:
        out = frozenset()
        for a in e.args:
            out |= free_jets(a)
        return out
    out = frozenset()
    for c in e.terms if t is Add else e.factors:
        out |= free_jets(c)
    return out


@lru_cache(maxsize=None)
def ufunc_names(e: Expr) -> frozenset:
    t = type(e)
    if t is Ufunc:
        out = frozenset((e.name,))
        for a in e.args:
            out |= ufunc_names(a)
        return out
    if t in (Rat, Sym, Jet):
        return frozenset()
    if t is Fun:
        return ufunc_names(e.arg)
    if t is Pow:
        return ufunc_names(e.base)
    out = frozenset()
    for c in e.terms if t is Add else e.factors:
        out |= ufunc_names(c)
    return out


# ---------------------------------------------------------------------------
# differentiation

_FUN_DERIV = {
    "tanh": lambda a: pow_(fun("sech", a), Fraction(2)),
    "sech": lambda a: mul(MINUS_ONE, fun("sech", a), fun("tanh", a)),
    "sinh": lambda a: fun("cosh", a),
    "cosh": lambda a: fun("sinh", a),
    "exp": lambda a: fun("exp", a),
}


def differentiate(e: Expr, v) -> Expr:
    """Exact partial derivative with respect to a symbol or a jet variable.

    Jet variables are constants under symbol derivatives and vice versa;
    unknown functions pick up formal slot derivatives through the chain
    rule.
    """
    t = type(e)
    if t is Rat:
        return ZERO
    if t is Sym:
        return ONE if e == v else ZERO
    if t is Jet:
        return ONE if e == v else ZERO
    if t is Add:
        return add(*(differentiate(x, v) for x in e.terms))
    if t is Mul:
        parts = []
        for i, f in enumerate(e.factors):
            df = differentiate(f, v)
            if type(df) is Rat and df.value == 0:
                continue
            parts.append(mul(*e.factors[:i], df, *e.factors[i + 1:]))
        return add(*parts) if parts else ZERO
    if t is Pow:
        db = differentiate(e.base, v)
        if type(db) is Rat and db.value == 0:
            return ZERO
        return mul(Rat(e.exp), pow_(e.base, e.exp - 1), db)
    if t is Fun:
        da = differentiate(e.arg, v)
        if type(da) is Rat and da.value == 0:
            return ZERO
        return mul(_FUN_DERIV[e.fn](e.arg), da)
    if t is Ufunc:
        parts = []
        for i, a in enumerate(e.args):
            da = differentiate(a, v)
            if type(da) is Rat and da.value == 0:
                continue
            dk = list(e.dorders)
            dk[i] += 1
            parts.append(mul(Ufunc(e.name, e.args, dk), da))
        return add(*parts) if parts else ZERO
    raise ExprError(f"cannot differentiate {e!r}")


def diff_n(e: Expr, v, n: int) -> Expr:
    for _ in range(n):
        e = differentiate(e, v)
    return e


# ---------------------------------------------------------------------------
# substitution

def substitute(e: Expr, bindings: dict) -> Expr:
    """Simultaneous substitution.

    Keys may be Sym, Jet, or an unknown-function name (str).  A string key
    maps to (params, body); stored slot derivatives are expanded by
    differentiating the body before the parameters are replaced.
    """
    ufn = {k: v for k, v in bindings.items() if isinstance(k, str)}
    for name, (params, body) in ufn.items():
        hit = ufunc_names(body) & set(ufn)
        if hit:
            raise CyclicBindingError(
                f"binding for {name!r} references bound function(s) {sorted(hit)}"
            )
    memo: dict = {}

    def walk(x: Expr) -> Expr:
        got = memo.get(x)
        if got is not None:
            return got
        t = type(x)
        if t in (Sym, Jet):
            out = bindings.get(x, x)
        elif t is Rat:
            out = x
        elif t is Add:
            out = add(*(walk(c) for c in x.terms))
        elif t is Mul:
            out = mul(*(walk(c) for c in x.factors))
        elif t is Pow:
            out = pow_(walk(x.base), x.exp)
        elif t is Fun:
            out = fun(x.fn, walk(x.arg))
        elif t is Ufunc:
            new_args = tuple(walk(a) for a in x.args)
            bound = ufn.get(x.name)
            if bound is None:
                out = Ufunc(x.name, new_args, x.dorders)
            else:
                params, body = bound
                if len(params) != len(x.args):
                    raise ExprError(f"arity mismatch substituting {x.name!r}")
                for p, k in zip(params, x.dorders):
                    body = diff_n(body, p, k)
                out = substitute(body, dict(zip(params, new_args)))
        else:
            raise ExprError(f"cannot substitute into {x!r}")
        memo[x] = out
        return out

    return walk(e)


# ---------------------------------------------------------------------------
# canonical text form (grammar of the parser in parse.py)

def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _pow_text(b: Expr, q: Fraction) -> str:
    bt = to_text(b)
    if type(b) in (Add, Mul, Pow) or (type(b) is Rat and (b.value < 0 or b.value.denominator != 1)):
        bt = f"({bt})"
    if q == 1:
        return bt
    if q.denominator == 1 and q > 0:
        return f"{bt}^{q.numerator}"
    return f"{bt}^({_frac_text(q)})"


def _term_text(coeff: Fraction, factors) -> str:
    """Render coeff * factors with negative powers moved under a '/'."""
    num, den = [], []
    for f in factors:
        b, q = _base_exp(f)
        (num if q > 0 else den).append(_pow_text(b, abs(q)))
    c = abs(coeff)
    if c.numerator != 1 or not num:
        num.insert(0, str(c.numerator))
    if c.denominator != 1:
        den.insert(0, str(c.denominator))
    s = "*".join(num)
    if den:
        d = "*".join(den)
        if len(den) > 1:
            d = f"({d})"
        s = f"{s}/{d}"
    return s


def to_text(e: Expr) -> str:
    t = type(e)
    if t is Rat:
        v = e.value
        return _frac_text(v) if v >= 0 else f"-{_frac_text(-v)}"
    if t is Sym:
        return e.name
    if t is Jet:
        if not e.idx:
            return e.dep
        return e.dep + "_" + "".join(v * c for v, c in e.idx)
    if t is Fun:
        return f"{e.fn}({to_text(e.arg)})"
    if t is Ufunc:
        args = ", ".join(to_text(a) for a in e.args)
        if any(e.dorders):
            # diagnostic form only; not part of the input grammar
            return f"{e.name}^{{{','.join(map(str, e.dorders))}}}({args})"
        return f"{e.name}({args})"
    if t is Pow:
        return _pow_text(e.base, e.exp)
    if t is Mul:
        c, restx = _coeff_rest(e)
        factors = restx.factors if type(restx) is Mul else (restx,)
        body = _term_text(c, factors)
        return f"-{body}" if c < 0 else body
    if t is Add:
        parts = []
        for i, term in enumerate(e.terms):
            c, restx = _coeff_rest(term)
            if restx is None:
                body = _frac_text(abs(c))
            else:
                factors = restx.factors if type(restx) is Mul else (restx,)
                body = _term_text(c, factors)
            if i == 0:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(parts)
    raise ExprError(f"cannot print {e!r}")
