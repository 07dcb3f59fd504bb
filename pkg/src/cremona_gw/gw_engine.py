"""Genus-zero Gromov-Witten invariants of P^n by WDVV reconstruction.

``I_d(h^{a_1}, ..., h^{a_r})`` is computed exactly from

* the dimension constraint ``sum(a_i - 1) == (n + 1) d + n - 3``,
* degree zero: only three-point invariants with ``a+b+c == n`` survive (value 1),
* the fundamental class axiom (``a_i == 0`` kills positive degree) and the
  divisor axiom (``a_i == 1`` contributes a factor ``d``),
* the line through two points, ``I_1(h^n, h^n) == 1``,
* associativity with ``gamma_1 = h``: to reduce ``I_d(h^a, h^b, h^c, S)``
  (``a`` the smallest exponent, ``b`` the largest), write the WDVV equation
  for ``(h, h^{a-1}, h^b, h^c; S)``. The target appears once; every other
  term has lower degree, fewer insertions, or the same degree and insertion
  count with a strictly larger sum of squared exponents, which bounds the
  recursion.

All arithmetic is on Python ints.
"""

from __future__ import annotations

import itertools
import sys
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

from .intersection import CurveClass


class NoIntegralR(ValueError):
    """No integral number of point conditions gives virtual dimension zero."""


class NotTradeable(ValueError):
    """Some multiplicity is outside {0, 1}; it is not a point condition."""


@dataclass(frozen=True)
class GWQuery:
    n: int
    d: int
    insertions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "insertions", tuple(sorted((int(a) for a in self.insertions), reverse=True)))
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.d < 0:
            raise ValueError("degree must be non-negative")

    def passes_dimension_gate(self) -> bool:
        return sum(a - 1 for a in self.insertions) == (self.n + 1) * self.d + self.n - 3


def _sub_multisets(items: tuple[int, ...]):
    """Yield (S1, S2, multiplicity) over splittings of a labelled multiset."""
    counts = sorted(Counter(items).items())
    ranges = [range(c + 1) for _, c in counts]
    for pick in itertools.product(*ranges):
        s1, s2 = [], []
        mult = 1
        for (val, c), k in zip(counts, pick):
            s1 += [val] * k
            s2 += [val] * (c - k)
            mult *= comb(c, k)
        yield tuple(s1), tuple(s2), mult


@lru_cache(maxsize=None)
def _gw(n: int, d: int, ins: tuple[int, ...]) -> int:
    # ins is sorted descending, entries in 0..n
    if sum(ins) != (n + 1) * d + n - 3 + len(ins):
        return 0
    if any(a > n or a < 0 for a in ins):
        return 0
    if d == 0:
        return 1 if len(ins) == 3 else 0
    if ins and ins[-1] == 0:
        return 0
    if ins and ins[-1] == 1:
        return d * _gw(n, d, ins[:-1])
    r = len(ins)
    if r < 3:
        return 1 if (d == 1 and ins == (n, n)) else 0

    b, c, *rest = ins
    a = rest.pop()
    S = tuple(rest)
    # WDVV for (h, h^{a-1}, h^b, h^c; S):  sum L(12|34) == sum R(13|24)
    total = _wdvv_side(n, d, 1, a - 1, b, c, S, skip_target=True)
    total = _wdvv_side(n, d, 1, b, a - 1, c, S) - total
    return total


def _canon(items: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(items, reverse=True))


def _wdvv_side(n: int, d: int, g1: int, g2: int, g3: int, g4: int, S: tuple[int, ...], skip_target: bool = False) -> int:
    """sum over d1+d2=d, S1+S2=S, e+f=n of I_{d1}(g1,g2,S1,T_e) I_{d2}(T_f,g3,g4,S2).

    With ``skip_target`` the single term ``d1 == 0, S1 == (), e == n-g1-g2``
    (which equals the invariant being solved for) is omitted.
    """
    total = 0
    for s1, s2, mult in _sub_multisets(S):
        for d1 in range(d + 1):
            d2 = d - d1
            for e in range(n + 1):
                if skip_target and d1 == 0 and not s1 and e == n - g1 - g2:
                    continue
                left = _gw(n, d1, _canon((g1, g2, e) + s1))
                if not left:
                    continue
                right = _gw(n, d2, _canon((n - e, g3, g4) + s2))
                if right:
                    total += mult * left * right
    return total


def wdvv_residual(n: int, d: int, gammas: Sequence[int], S: Sequence[int]) -> int:
    """(12|34) minus (13|24) for the given four classes; zero when consistent."""
    g1, g2, g3, g4 = gammas
    S = _canon(S)
    return _wdvv_side(n, d, g1, g2, g3, g4, S) - _wdvv_side(n, d, g1, g3, g2, g4, S)


def _ensure_recursion_limit():
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)


def gw_pn(q: GWQuery) -> int:
    """``<h^{a_1}, ..., h^{a_r}>_{0,d}`` on P^n, insertions restricted to 2..n."""
    if any(a < 2 or a > q.n for a in q.insertions):
        raise ValueError("insertions must lie in [2, n]; use divisor/fundamental axioms externally")
    if not q.passes_dimension_gate():
        return 0
    _ensure_recursion_limit()
    return _gw(q.n, q.d, q.insertions)


def gw_invariant(n: int, d: int, insertions: Iterable[int]) -> int:
    return gw_pn(GWQuery(n, d, tuple(insertions)))


@dataclass(frozen=True)
class Stationary:
    r: int
    N: int


def stationary_points(n: int, d: int) -> int:
    num = (n + 1) * d + n - 3
    if num % (n - 1):
        raise NoIntegralR(f"r = {num}/{n - 1} is not integral")
    return num // (n - 1)


def stationary(n: int, d: int) -> Stationary:
    """Number of rational degree-d curves through the right number of points."""
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    r = stationary_points(n, d)
    return Stationary(r, gw_pn(GWQuery(n, d, (n,) * r)))


@lru_cache(maxsize=None)
def kontsevich_p2(d: int) -> int:
    """Kontsevich's recursion for rational plane curves through 3d - 1 points."""
    if d < 1:
        raise ValueError("d must be positive")
    if d == 1:
        return 1
    total = 0
    for d1 in range(1, d):
        d2 = d - d1
        total += (
            kontsevich_p2(d1)
            * kontsevich_p2(d2)
            * d1 ** 2
            * d2
            * (d2 * comb(3 * d - 4, 3 * d1 - 2) - d1 * comb(3 * d - 4, 3 * d1 - 1))
        )
    return total


def trade_points(n: int, m: int, d: int, a: Sequence[int], r: int) -> GWQuery:
    """Trade every multiplicity-one point for a point insertion.

    ``<pt^r>_{d h - sum a_i e_i}`` with all ``a_i`` in {0, 1} becomes
    ``<pt^{r + sum a_i}>_{d h}`` on P^n.
    """
    if len(a) > m:
        raise ValueError("more multiplicities than points")
    a = list(a) + [0] * (m - len(a))
    bad = [i + 1 for i, x in enumerate(a) if x not in (0, 1)]
    if bad:
        raise NotTradeable(f"multiplicities at points {bad} are not 0 or 1")
    if r < 0:
        raise ValueError("number of point insertions must be non-negative")
    return GWQuery(n, d, (n,) * (r + sum(a)))


def absorb_points(n: int, d: int, r: int) -> tuple[int, int, tuple[int, ...], int]:
    """Inverse of :func:`trade_points`: ``<pt^r>_{dh}`` as ``(m, d, a, 0)`` with all points absorbed."""
    return r, d, (1,) * r, 0


def blowup_class_query(n: int, beta: CurveClass, r: int) -> GWQuery:
    """Convenience wrapper taking a :class:`CurveClass` on X_0(m)."""
    if any(len(g) != 1 for g in beta.a):
        raise NotTradeable("class involves higher-dimensional centres")
    a = {next(iter(g)) + 1: v for g, v in beta.a.items()}
    a.update(beta.extra)
    m = max([n + 1, *a])
    return trade_points(n, m, beta.d, [a.get(i, 0) for i in range(1, m + 1)], r)


def point_insertions_for_vdim_zero(n: int, d: int, a: Sequence[int]) -> int | None:
    """Point conditions ``r`` making ``<pt^r>_beta`` dimensionally meaningful on X_0(m).

    ``vdim = (n - 3) - K.beta + r`` must equal ``n r``.
    """
    minus_k = (n + 1) * d - (n - 1) * sum(a)
    num = n - 3 + minus_k
    if num % (n - 1) or num < 0:
        return None
    return num // (n - 1)



@dataclass
class Side:
    d: int
    a: tuple[int, ...]
    computable: bool
    value: int | None = None
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "a": list(self.a),
            "computable": self.computable,
            "value": None if self.value is None else str(self.value),
            "reason": self.reason,
        }


@dataclass
class SymmetryReport:
    n: int
    m: int
    r: int
    beta: Side
    image: Side
    fixed: bool
    equal: bool | None
    certificate: dict
    flags: list[str]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "r": self.r,
            "beta": self.beta.as_dict(),
            "image": self.image.as_dict(),
            "fixed": self.fixed,
            "equal": self.equal,
            "certificate": self.certificate,
            "flags": list(self.flags),
        }


def _evaluate_side(n: int, m: int, d: int, a: Sequence[int], r: int) -> Side:
    try:
        q = trade_points(n, m, d, a, r)
    except NotTradeable as exc:
        return Side(d, tuple(a), False, reason=str(exc))
    if d < 0:
        return Side(d, tuple(a), False, reason="negative degree")
    if d == 0:
        # only the class 0 with no conditions remains; not a stationary count
        return Side(d, tuple(a), False, reason="degree zero class")
    return Side(d, tuple(a), True, gw_pn(q))


def symmetry_check(n: int, m: int, d: int, a: Sequence[int], r: int) -> SymmetryReport:
    """Compare ``<pt^r>`` on ``beta`` and its Cremona image where both are reachable."""
    from .cremona import cremona_transform_class
    from .degeneration import certify_nonexceptional, is_rational_normal_family

    a = tuple(a) + (0,) * (m - len(a))
    d2, a2 = cremona_transform_class(n, m, d, a)
    left = _evaluate_side(n, m, d, a, r)
    right = _evaluate_side(n, m, d2, a2, r)
    equal = left.value == right.value if left.computable and right.computable else None

    flags = []
    if m == n + 1:
        flags.append("m = n + 1: no extra points; the symmetry statement is usually posed with m > n + 1")
    kind = "extremal" if is_rational_normal_family(n, d, a) else None
    cert = certify_nonexceptional(n, d, a, certificate=kind, bound=min(max(d, 0), n))
    certificate = {"status": cert.status, "kind": kind or "none", "reason": cert.reason}
    return SymmetryReport(n, m, r, left, right, (d, a) == (d2, a2), equal, certificate, flags)
