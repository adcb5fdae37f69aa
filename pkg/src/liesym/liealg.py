"""Lie brackets, the commutator table, structure constants, sanity checks.

Decomposition failures are first-class results (None entries plus a
failure list), never exceptions: a mismatch against the shipped table
must be reportable as data.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from .expr import add, jet, mul, rat
from .jets import PDE, VectorField
from .normal import canonical, is_zero
from .parse import ParseContext, parse
from . import linalg
from .detsys import SymmetryBasis, check_membership, _field_vector


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^k = X(Y^k) - Y(X^k), coefficients canonicalized."""
    xi = [canonical(add(X.apply_to(cy), mul(rat(-1), Y.apply_to(cx))))
          for cx, cy in zip(X.xi, Y.xi)]
    eta = canonical(add(X.apply_to(Y.eta), mul(rat(-1), Y.apply_to(X.eta))))
    return VectorField(xi, eta, X.vars, X.dep)


class CommutatorTable:
    """n x n decompositions of [v_i, v_j] in the given basis."""

    def __init__(self, basis: SymmetryBasis, entries, failures):
        self.basis = basis
        self.entries = entries      # entries[i][j]: list[Fraction] or None
        self.failures = tuple(failures)  # (i, j, bracket) triples

    @property
    def closed(self) -> bool:
        return not self.failures

    def structure_constants(self):
        n = len(self.basis)
        return StructureConstants(
            [[list(self.entries[i][j]) if self.entries[i][j] is not None
              else None for j in range(n)] for i in range(n)]
        )

    def is_skew_symmetric(self) -> bool:
        n = len(self.basis)
        for i in range(n):
            for j in range(n):
                a, b = self.entries[i][j], self.entries[j][i]
                if a is None or b is None:
                    return False
                if any(x != -y for x, y in zip(a, b)):
                    return False
        return True


class StructureConstants:
    def __init__(self, c):
        self.c = c
        self.n = len(c)

    def get(self, i, j, k) -> Fraction:
        return Fraction(self.c[i][j][k])

    def antisymmetry_violations(self):
        out = []
        for i in range(self.n):
            for j in range(self.n):
                for k in range(self.n):
                    if self.get(i, j, k) != -self.get(j, i, k):
                        out.append((i, j, k))
        return out

    def jacobi_violations(self):
        """Triples (i, j, k, l) where the Jacobi identity fails."""
        out = []
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    for l in range(n):
                        s = Fraction(0)
                        for m in range(n):
                            s += (self.get(i, j, m) * self.get(m, k, l)
                                  + self.get(j, k, m) * self.get(m, i, l)
                                  + self.get(k, i, m) * self.get(m, j, l))
                        if s != 0:
                            out.append((i, j, k, l))
        return out


def jacobi_check(sc: StructureConstants) -> dict:
    anti = sc.antisymmetry_violations()
    jac = sc.jacobi_violations()
    return {"antisymmetry_violations": anti, "jacobi_violations": jac,
            "ok": not anti and not jac}


def commutator_table(basis: SymmetryBasis) -> CommutatorTable:
    n = len(basis)
    entries = [[None] * n for _ in range(n)]
    failures = []
    fields = list(basis.fields)
    for i in range(n):
        for j in range(n):
            if i == j:
                entries[i][j] = [Fraction(0)] * n
                continue
            if j < i and entries[j][i] is not None:
                entries[i][j] = [-c for c in entries[j][i]]
                continue
            br = lie_bracket(fields[i], fields[j])
            if br.is_zero():
                entries[i][j] = [Fraction(0)] * n
                continue
            coords = check_membership(basis, br)
            if coords is None:
                failures.append((i, j, br))
            else:
                entries[i][j] = coords
    return CommutatorTable(basis, entries, failures)


def linearly_independent(fields) -> bool:
    vecs = [_field_vector(V) for V in fields]
    keys = sorted(set().union(*[set(v) for v in vecs]),
                  key=lambda k: (k[0], str(k[1])))
    rows = [[v.get(k, Fraction(0)) for k in keys] for v in vecs]
    return linalg.rank(rows) == len(fields)


# ---------------------------------------------------------------------------
# shipped data

def _data_text(name: str) -> str:
    return resources.files("liesym.data").joinpath(name).read_text()


def reference_basis(pde: PDE) -> SymmetryBasis:
    """The published ten generators, in publication order."""
    ctx = ParseContext(indep=[v.name for v in pde.vars], deps=(pde.dep,))
    fields = []
    for line in _data_text("basis_reference.txt").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        _, rhs = line.split("=", 1)
        parts = [parse(p.strip(), ctx) for p in rhs.split("|")]
        fields.append(VectorField(parts[:-1], parts[-1], pde.vars, pde.dep))
    return SymmetryBasis(fields)


def load_golden_table(text: str = None):
    """Parse nonzero table cells: {(i, j): (coefficient, k)} (0-based)."""
    if text is None:
        text = _data_text("table1.golden")
    cells = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, rhs = line.split("=", 1)
        pair = lhs.strip().strip("[]").split(",")
        i = int(pair[0].strip()[1:]) - 1
        j = int(pair[1].strip()[1:]) - 1
        coeff_txt, k_txt = rhs.split()
        cells[(i, j)] = (Fraction(coeff_txt), int(k_txt[1:]) - 1)
    return cells


def compare_with_golden(table: CommutatorTable, golden=None):
    """Cell-by-cell diff against the shipped transcription."""
    if golden is None:
        golden = load_golden_table()
    n = len(table.basis)
    mismatches = []
    for i in range(n):
        for j in range(n):
            got = table.entries[i][j]
            expect = [Fraction(0)] * n
            if (i, j) in golden:
                coeff, k = golden[(i, j)]
                expect[k] = coeff
            if got is None or list(got) != expect:
                mismatches.append((i, j, got, expect))
    return mismatches


def format_table(table: CommutatorTable, names=None) -> str:
    """Fixed-width text rendering of the commutator table."""
    n = len(table.basis)
    names = names or [f"v{i + 1}" for i in range(n)]

    def cell(entry):
        if entry is None:
            return "?"
        nz = [(c, k) for k, c in enumerate(entry) if c != 0]
        if not nz:
            return "0"
        return "+".join(
            (names[k] if c == 1 else f"-{names[k]}" if c == -1 else f"{c} {names[k]}")
            for c, k in nz
        ).replace("+-", "-")
    rows = [["*"] + names]
    for i in range(n):
        rows.append([names[i]] + [cell(table.entries[i][j]) for j in range(n)])
    widths = [max(len(r[c]) for r in rows) for c in range(n + 1)]
    return "\n".join(
        "  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows
    )
