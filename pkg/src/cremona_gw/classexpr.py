"""Parser for the textual class notation used on the command line.

    expr := term (('+' | '-') term)*
    term := [int ['*']] atom
    atom := 'H' | 'h' | 'E{' ints '}' | 'e{' ints '}' | 'E' int | 'e' int

``E{...}``/``e{...}`` name a centre by its set of fixed points (0-based,
inside ``{0..n}``). ``E<k>``/``e<k>`` name the k-th blown-up point, counted
from 1: points ``1..n+1`` are the coordinate points and later ones are extra
points. So ``e1`` and ``e{0}`` are the same class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .intersection import CurveClass, GeometricDivisorClass

_TOKEN = re.compile(r"\s*(?:(?P<op>[+-])|(?P<int>\d+)|(?P<star>\*)|(?P<atom>[HhEe])(?:\{(?P<set>[\d,\s]*)\}|(?P<idx>\d+))?)")


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class ClassExpr:
    kind: str  # "divisor" | "curve"
    terms: Mapping  # "H" -> coeff, frozenset -> coeff, int (1-based point) -> coeff

    def _split(self, n: int) -> tuple[int, dict, dict]:
        top, centres, extra = 0, {}, {}
        for key, c in self.terms.items():
            if key == "H":
                top += c
                continue
            if isinstance(key, int):
                if key < 1:
                    raise ParseError("points are numbered from 1")
                if key <= n + 1:
                    key = frozenset({key - 1})
                else:
                    extra[key] = extra.get(key, 0) + c
                    continue
            if not key < frozenset(range(n + 1)) or not key:
                raise ParseError(f"{sorted(key)} is not a centre label for n = {n}")
            centres[key] = centres.get(key, 0) + c
        return top, centres, extra

    def curve(self, n: int) -> CurveClass:
        if self.kind != "curve":
            raise ParseError("expected a curve class (h, e...)")
        d, centres, extra = self._split(n)
        return CurveClass(d, {k: -v for k, v in centres.items()}, {k: -v for k, v in extra.items()})

    def divisor(self, n: int) -> GeometricDivisorClass:
        if self.kind != "divisor":
            raise ParseError("expected a divisor class (H, E...)")
        top, centres, extra = self._split(n)
        return GeometricDivisorClass(top, centres, extra)

    def point_data(self, n: int) -> tuple[int, list[int]]:
        """``(d, a)`` for a curve ``d h - sum a_i e_i`` supported on points only."""
        c = self.curve(n)
        if any(len(g) != 1 for g in c.a):
            raise ParseError("class involves centres of dimension >= 1")
        a = {next(iter(g)) + 1: v for g, v in c.a.items()}
        a.update(c.extra)
        m = max([n + 1, *a])
        return c.d, [a.get(i, 0) for i in range(1, m + 1)]


def parse_class(text: str) -> ClassExpr:
    pos, sign, coeff, starred = 0, 1, None, False
    expect_term = True
    terms: dict = {}
    kinds = set()
    text = text.strip()
    if not text:
        raise ParseError("empty class expression")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {pos}: {text[pos:]!r}")
        pos = m.end()
        if m.group("op"):
            if not expect_term and coeff is None:
                sign = 1 if m.group("op") == "+" else -1
                expect_term = True
            elif expect_term and coeff is None and not terms and sign == 1:
                sign = 1 if m.group("op") == "+" else -1
            else:
                raise ParseError(f"misplaced operator at {pos - 1}")
        elif m.group("int"):
            if not expect_term or coeff is not None:
                raise ParseError(f"misplaced integer at {m.start('int')}")
            coeff = int(m.group("int"))
        elif m.group("star"):
            if coeff is None or starred:
                raise ParseError("'*' must follow a coefficient")
            starred = True
        else:
            if not expect_term:
                raise ParseError(f"missing operator before {m.group(0).strip()!r}")
            atom = m.group("atom")
            kinds.add("divisor" if atom.isupper() else "curve")
            if atom in "Hh":
                if m.group("set") is not None or m.group("idx") is not None:
                    raise ParseError("H/h take no index")
                key = "H"
            elif m.group("set") is not None:
                parts = [p for p in m.group("set").replace(" ", "").split(",") if p]
                if not parts:
                    raise ParseError("empty centre label")
                key = frozenset(int(p) for p in parts)
                if len(key) != len(parts):
                    raise ParseError("repeated index in centre label")
            elif m.group("idx") is not None:
                key = int(m.group("idx"))
            else:
                raise ParseError(f"{atom} needs an index")
            value = sign * (1 if coeff is None else coeff)
            terms[key] = terms.get(key, 0) + value
            sign, coeff, starred, expect_term = 1, None, False, False
    if coeff is not None:
        raise ParseError("coefficient without a class")
    if expect_term:
        raise ParseError("expression ends with an operator")
    if len(kinds) != 1:
        raise ParseError("cannot mix divisor (upper case) and curve (lower case) atoms")
    return ClassExpr(kinds.pop(), {k: v for k, v in terms.items() if v})
