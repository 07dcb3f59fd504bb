"""Small exact linear algebra over the integers and rationals.

Matrices are lists of rows. Everything is done with ``int`` and
``fractions.Fraction``; sizes in this package stay below ~100 so plain
Gaussian elimination is fast enough.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list]


def det(m: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix (fraction-free Bareiss elimination)."""
    a = [list(row) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rref(m: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q. Returns (matrix, pivot columns)."""
    a = [[Fraction(x) for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m:
        return 0
    return len(rref(m)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Unique solution of the square system ``a x = b``; raises if singular."""
    n = len(a)
    aug = [list(row) + [b[i]] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [red[i][n] for i in range(n)]


def inverse(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def nullspace(m: Sequence[Sequence]) -> Matrix:
    """Basis of the right kernel over Q, one vector per free column."""
    cols = len(m[0])
    red, pivots = rref(m)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        basis.append(v)
    return basis


def primitive_integer(v: Sequence) -> list[int]:
    """Scale a rational vector to the primitive integer vector with the same direction."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector")
    return [x // g for x in ints]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def as_int_matrix(a: Sequence[Sequence]) -> Matrix:
    """Convert a rational matrix known to be integral; raises otherwise."""
    out = []
    for row in a:
        r = []
        for x in row:
            x = Fraction(x)
            if x.denominator != 1:
                raise ValueError(f"non-integral entry {x}")
            r.append(int(x))
        out.append(r)
    return out
