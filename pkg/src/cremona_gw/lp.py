"""Exact two-phase simplex over the rationals with Bland's pivoting rule.

Solves ``maximize c.x  subject to  A x = b, x >= 0``. Bland's rule makes the
pivot sequence (and so every reported optimal vertex) deterministic and
guarantees termination without cycling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _pivot(t: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    inv = 1 / t[r][c]
    t[r] = [v * inv for v in t[r]]
    pr = t[r]
    for i, row in enumerate(t):
        if i != r and row[c] != 0:
            f = row[c]
            t[i] = [a - f * b for a, b in zip(row, pr)]
    if obj[c] != 0:
        f = obj[c]
        obj[:] = [a - f * b for a, b in zip(obj, pr)]


def _run(t, obj, basis, ncols) -> bool:
    """Optimise in place. Returns False when the objective is unbounded."""
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return True
        best = None
        for i, row in enumerate(t):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        r = best[1]
        _pivot(t, obj, r, enter)
        basis[r] = enter


def maximize(c: Sequence, a_eq: Sequence[Sequence], b_eq: Sequence) -> LPResult:
    nvar = len(c)
    m = len(a_eq)
    rows = []
    for row, rhs in zip(a_eq, b_eq):
        row = [Fraction(v) for v in row]
        rhs = Fraction(rhs)
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        rows.append(row + [Fraction(0)] * m + [rhs])
    for i in range(m):
        rows[i][nvar + i] = Fraction(1)
    basis = [nvar + i for i in range(m)]
    ncols = nvar + m

    # phase one: maximise -(sum of artificials)
    obj = [Fraction(0)] * (ncols + 1)
    for row in rows:
        for j in range(nvar):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    _run(rows, obj, basis, ncols)
    if obj[-1] != 0:
        return LPResult("infeasible")

    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(rows):
        if basis[i] >= nvar:
            col = next((j for j in range(nvar) if rows[i][j] != 0), None)
            if col is None:
                del rows[i]
                del basis[i]
                continue
            _pivot(rows, obj, i, col)
            basis[i] = col
        i += 1
    rows = [row[:nvar] + [row[-1]] for row in rows]

    cost = [Fraction(v) for v in c]
    obj = [-v for v in cost] + [Fraction(0)]
    for i, bv in enumerate(basis):
        if cost[bv] != 0:
            f = cost[bv]
            obj = [a + f * b for a, b in zip(obj, rows[i])]
    if not _run(rows, obj, basis, nvar):
        return LPResult("unbounded")
    x = [Fraction(0)] * nvar
    for i, bv in enumerate(basis):
        x[bv] = rows[i][-1]
    return LPResult("optimal", obj[-1], tuple(x))


def feasible(a_eq: Sequence[Sequence], b_eq: Sequence) -> LPResult:
    """Phase-one only: find some x >= 0 with A x = b."""
    nvar = len(a_eq[0]) if a_eq else 0
    return maximize([0] * nvar, a_eq, b_eq)
