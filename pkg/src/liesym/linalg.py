"""Exact rational linear algebra: fraction-free elimination, nullspaces.

Row reduction over arbitrary-precision integers (Bareiss), so pivots
never introduce rational blowup; back-substitution is done in Fractions.
No floating point anywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction


def _int_rows(rows):
    out = []
    for r in rows:
        scale = 1
        for c in r:
            d = Fraction(c).denominator
            scale = scale * d // math.gcd(scale, d)
        out.append([int(Fraction(c) * scale) for c in r])
    return out


def bareiss_echelon(rows):
    """Fraction-free row echelon form; returns (rows, pivot (row,col) list)."""
    m = [r[:] for r in rows]
    n = len(m)
    cols = len(m[0]) if n else 0
    pivots = []
    prev = 1
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, n) if m[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            m[r], m[p] = m[p], m[r]
        for i in range(r + 1, n):
            for j in range(c + 1, cols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        pivots.append((r, c))
        r += 1
        if r == n:
            break
    return m, pivots


def nullspace(rows, ncols=None):
    """Rational basis of the right nullspace of the row list."""
    if not rows:
        return [[Fraction(1) if i == j else Fraction(0) for i in range(ncols)]
                for j in range(ncols or 0)]
    ncols = ncols or len(rows[0])
    m, pivots = bareiss_echelon(_int_rows(rows))
    piv_cols = [c for _, c in pivots]
    free_cols = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for f in free_cols:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in reversed(pivots):
            s = sum((Fraction(m[r][j]) * v[j] for j in range(c + 1, ncols)),
                    Fraction(0))
            v[c] = -s / m[r][c]
        # first nonzero coefficient scaled to 1
        lead = next(x for x in v if x != 0)
        v = [x / lead for x in v]
        basis.append(v)
    basis.sort(key=lambda v: (tuple(i for i, x in enumerate(v) if x != 0),
                              tuple(v)))
    return basis


def rank(rows) -> int:
    if not rows:
        return 0
    _, pivots = bareiss_echelon(_int_rows(rows))
    return len(pivots)


def lin_solve(rows, rhs):
    """One exact solution of rows * x = rhs (free unknowns at 0), or None."""
    n = len(rows)
    if n == 0:
        return []
    cols = len(rows[0])
    aug = [[Fraction(c) for c in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, n) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append((r, c))
        r += 1
        if r == n:
            break
    for i in range(n):
        if all(x == 0 for x in aug[i][:cols]) and aug[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for r, c in pivots:
        x[c] = aug[r][cols]
    return x
