"""Lie brackets, the commutator table, structure constants, Jacobi."""

import random
from fractions import Fraction

import pytest

from liesym import add, is_zero, mul, parse, rat
from liesym.jets import VectorField
from liesym.liealg import (
    StructureConstants, commutator_table, compare_with_golden,
    format_table, jacobi_check, lie_bracket, linearly_independent,
    load_golden_table,
)
from liesym.detsys import SymmetryBasis


@pytest.fixture(scope="module")
def table(basis):
    return commutator_table(basis)


def VF(pde, xs, eta):
    return VectorField([parse(s) for s in xs], parse(eta), pde.vars, pde.dep)


def _field_equal(A, B):
    return all(is_zero(add(a, mul(rat(-1), b)))
               for a, b in zip((*A.xi, A.eta), (*B.xi, B.eta)))


class TestBracket:
    def test_scaling_with_shift(self, basis):
        # [v1, v2] = (1/4) v2
        v1, v2 = basis.fields[0], basis.fields[1]
        br = lie_bracket(v1, v2)
        assert _field_equal(br, v2.scaled(rat(1, 4)))

    def test_time_translation_with_galilean(self, basis):
        # [v3, v8] = v10
        br = lie_bracket(basis.fields[2], basis.fields[7])
        assert _field_equal(br, basis.fields[9])

    def test_self_bracket_vanishes(self, basis):
        for V in basis.fields:
            assert lie_bracket(V, V).is_zero()

    def test_x_translation_with_galilean(self, basis):
        # [v4, v10] = -(1/20) v2
        br = lie_bracket(basis.fields[3], basis.fields[9])
        assert _field_equal(br, basis.fields[1].scaled(rat(-1, 20)))

    def test_antisymmetry_random_fields(self, pde):
        rng = random.Random(7)
        pool = ["0", "1", "x", "y", "t", "x*y", "u", "x^2", "t*u"]
        for _ in range(6):
            A = VF(pde, [rng.choice(pool) for _ in range(4)], rng.choice(pool))
            B = VF(pde, [rng.choice(pool) for _ in range(4)], rng.choice(pool))
            lhs = lie_bracket(A, B)
            rhs = lie_bracket(B, A).scaled(rat(-1))
            assert _field_equal(lhs, rhs)

    def test_jacobi_random_fields(self, pde):
        rng = random.Random(11)
        pool = ["0", "1", "x", "y", "u", "x*t", "y^2"]
        for _ in range(3):
            A = VF(pde, [rng.choice(pool) for _ in range(4)], rng.choice(pool))
            B = VF(pde, [rng.choice(pool) for _ in range(4)], rng.choice(pool))
            C = VF(pde, [rng.choice(pool) for _ in range(4)], rng.choice(pool))
            s = lie_bracket(A, lie_bracket(B, C)) \
                .plus(lie_bracket(B, lie_bracket(C, A))) \
                .plus(lie_bracket(C, lie_bracket(A, B)))
            assert s.is_zero()


class TestTable:
    def test_closure(self, table):
        assert table.closed

    def test_skew_symmetry(self, table):
        assert table.is_skew_symmetric()

    def test_matches_golden_every_cell(self, table):
        assert compare_with_golden(table) == []

    def test_translation_subalgebra_commutes(self, pde, basis):
        sub = SymmetryBasis([basis.fields[i] for i in (1, 2, 5, 6, 9)])
        t = commutator_table(sub)
        assert all(all(c == 0 for c in entry)
                   for row in t.entries for entry in row)

    def test_linear_independence(self, basis):
        assert linearly_independent(basis.fields)

    def test_format_mentions_cells(self, table):
        text = format_table(table)
        assert "1/4 v2" in text and "-1/20 v2" in text


class TestStructureConstants:
    def test_jacobi_holds(self, table):
        rep = jacobi_check(table.structure_constants())
        assert rep["ok"]
        assert rep["jacobi_violations"] == []

    def test_corrupted_constant_reported(self, table):
        sc = table.structure_constants()
        sc.c[0][1][1] = Fraction(1, 3)  # corrupt c[1][2][2]
        rep = jacobi_check(sc)
        assert not rep["ok"]

    def test_trivial_algebra_vacuous(self):
        sc = StructureConstants([[[Fraction(0)]]])
        rep = jacobi_check(sc)
        assert rep["ok"]


class TestGolden:
    def test_load_golden_cells(self):
        cells = load_golden_table()
        assert cells[(0, 1)] == (Fraction(1, 4), 1)
        assert cells[(3, 9)] == (Fraction(-1, 20), 1)
        # skew-symmetric transcription
        for (i, j), (c, k) in cells.items():
            assert cells[(j, i)] == (-c, k)

    def test_mismatch_detected(self, table):
        golden = load_golden_table()
        golden[(0, 1)] = (Fraction(1, 3), 1)
        mism = compare_with_golden(table, golden)
        assert len(mism) == 1 and mism[0][:2] == (0, 1)
