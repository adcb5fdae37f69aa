"""Catalog records: claimed closed-form solutions, reduced equations,
similarity ansatz substitutions, and Weierstrass-function claims.

Plain-text block format: a `[name]` header followed by `key: value`
lines; `newvar`/`back` keys may repeat.  Claims are recorded verbatim;
corrected variants live in separate records whose names end in
`-corrected`, never replacing the original.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from .expr import Expr, KIND_PARAM, symbol
from .parse import ParseContext, parse


class CatalogError(Exception):
    pass


class Record:
    REPEATED = ("newvar", "back")

    def __init__(self, name: str, fields: dict):
        self.name = name
        self.fields = fields

    def get(self, key, default=None):
        return self.fields.get(key, default)

    def __contains__(self, key):
        return key in self.fields

    @property
    def kind(self):
        return self.fields.get("kind", "solution")

    @property
    def expected(self):
        return self.fields.get("expected", "zero")

    def params(self) -> dict:
        out = {}
        for part in self.get("params", "").split():
            k, v = part.split("=")
            out[k] = float(Fraction(v)) if "." not in v else float(v)
        return out

    def nonzero(self) -> tuple:
        return tuple(self.get("nonzero", "").split())

    def pairs(self, key) -> list:
        """Repeated `key: lhs = rhs` lines as (lhs, rhs-text) pairs."""
        out = []
        for raw in self.fields.get(key, []):
            lhs, rhs = raw.split("=", 1)
            out.append((lhs.strip(), rhs.strip()))
        return out


def parse_catalog(text: str) -> list:
    records = []
    name = None
    fields: dict = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.startswith("["):
            if name is not None:
                records.append(Record(name, fields))
            name = line.strip().strip("[]")
            fields = {}
            continue
        if name is None:
            raise CatalogError(f"field outside a record: {line!r}")
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if key in Record.REPEATED:
            fields.setdefault(key, []).append(value)
        else:
            if key in fields:
                raise CatalogError(f"duplicate field {key!r} in [{name}]")
            fields[key] = value
    if name is not None:
        records.append(Record(name, fields))
    return records


def load_catalog(path=None) -> list:
    import os
    if path is None or (path == "paper_catalog.txt" and not os.path.exists(path)):
        text = resources.files("liesym.data").joinpath("paper_catalog.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return parse_catalog(text)


# ---------------------------------------------------------------------------
# context helpers

def solution_context(extra_kinds=None) -> ParseContext:
    kinds = {"i": KIND_PARAM}
    kinds.update(extra_kinds or {})
    return ParseContext(indep=("x", "y", "z", "t"), deps=("u",), kinds=kinds)


def record_context(rec: Record) -> ParseContext:
    """Context for ode/general records: `vars` + `unknown`."""
    variables = tuple(rec.get("vars", "w").split())
    unknown = rec.get("unknown", "R")
    return ParseContext(indep=variables, deps=(unknown,))


def undeclared_divisors(e: Expr, declared, coords) -> tuple:
    """Parameter symbols occurring in denominators but not declared nonzero."""
    from .expr import Add, Fun, Mul, Pow, Ufunc, free_symbols

    bad = set()

    def walk(x):
        t = type(x)
        if t is Pow:
            if x.exp < 0:
                for s in free_symbols(x.base):
                    if s.name not in declared and s.name not in coords:
                        bad.add(s.name)
            walk(x.base)
        elif t is Fun:
            walk(x.arg)
        elif t is Ufunc:
            for a in x.args:
                walk(a)
        elif t is Add:
            for c in x.terms:
                walk(c)
        elif t is Mul:
            for c in x.factors:
                walk(c)

    walk(e)
    return tuple(sorted(bad))
