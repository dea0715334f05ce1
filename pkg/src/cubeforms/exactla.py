"""Small dense exact linear algebra over the rationals.

Rank goes through fraction-free (Bareiss) elimination on an integer-cleared
copy, which stays fast for the few-hundred-row matrices that show up in
unisolvence checks.  Reduced echelon form and solves use Fraction
arithmetic directly; matrices are plain lists of lists.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Row = list[Fraction]


def _cleared_int_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        denom = 1
        for x in row:
            f = Fraction(x)
            denom = denom * f.denominator // gcd(denom, f.denominator)
        out.append([int(Fraction(x) * denom) for x in row])
    return out


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Exact rank via Bareiss fraction-free elimination."""
    if not rows:
        return 0
    m = _cleared_int_rows(rows)
    nrows, ncols = len(m), len(m[0])
    r = 0
    prev = 1
    for col in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        p = pr[col]
        for i in range(r + 1, nrows):
            ri = m[i]
            f = ri[col]
            for j in range(col, ncols):
                ri[j] = (p * ri[j] - f * pr[j]) // prev
        prev = p
        r += 1
    return r


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    nrows, ncols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    return m[:r], pivots


def reduce_against(echelon: Sequence[Row], pivots: Sequence[int], vec: Sequence[Fraction]) -> Row:
    """Residual of a vector after elimination against an RREF basis."""
    v = [Fraction(x) for x in vec]
    for row, col in zip(echelon, pivots):
        f = v[col]
        if f != 0:
            v = [a - f * b for a, b in zip(v, row)]
    return v


def in_row_span(echelon: Sequence[Row], pivots: Sequence[int], vec: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in reduce_against(echelon, pivots, vec))


def solve_matrix(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> list[Row]:
    """Exact solve A X = B for square invertible A (Gauss-Jordan)."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    aug = [
        [Fraction(x) for x in row_a] + [Fraction(x) for x in row_b]
        for row_a, row_b in zip(a, b)
    ]
    width = len(aug[0])
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [row[n:width] for row in aug]


def invert(a: Sequence[Sequence[Fraction]]) -> list[Row]:
    n = len(a)
    identity = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    return solve_matrix(a, identity)


def is_invertible(a: Sequence[Sequence[Fraction]]) -> bool:
    n = len(a)
    return n == 0 or (all(len(r) == n for r in a) and rank(a) == n)
