"""Divisor and curve classes on the tower stages and their intersection pairing.

Conventions
-----------
* Centres ``gamma`` are subsets of ``{0..n}`` (fixed points p_0..p_n).
  Point number ``i`` in user-facing class data (1-based, as in
  ``beta = d h - sum a_i e_i``) is the centre ``{i - 1}`` for
  ``i <= n + 1``; larger ``i`` are extra blown-up points in general
  position, which never appear in a fan.
* Toric divisors ``D_alpha`` follow the sign convention in which
  ``D_{i} = -H + sum_{gamma not containing i} E_gamma`` and
  ``D_alpha = -E_{[n] - alpha}`` for ``|alpha| >= 2``, so that
  ``K = sum_alpha D_alpha``. The torus-invariant prime divisor of a ray is
  ``-D_alpha``; a wall curve ``C`` meets it with multiplicity equal to the
  coefficient of that ray in the wall relation.
* ``h``, ``e_gamma`` are defined by duality: ``H.h = 1``,
  ``E_gamma.e_delta = -delta(gamma, delta)``, all other pairings zero.
  A class ``d h - sum a_gamma e_gamma`` has "plain" coordinates
  ``(d, -a_gamma, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, Sequence

from . import linalg, lp
from .lattice_core import WallData, enumerate_walls
from .tower import StageFan, build_stage, full_set, label_key


def _clean(d: Mapping) -> dict:
    return {k: int(v) for k, v in d.items() if v != 0}


@dataclass(frozen=True)
class GeometricDivisorClass:
    """``H_coeff * H + sum E[gamma] * E_gamma + sum extra[i] * E_i``."""

    H: int = 0
    E: Mapping[frozenset, int] = field(default_factory=dict)
    extra: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "E", _clean({frozenset(k): v for k, v in self.E.items()}))
        object.__setattr__(self, "extra", _clean(self.extra))

    def __add__(self, other: "GeometricDivisorClass") -> "GeometricDivisorClass":
        E = dict(self.E)
        for k, v in other.E.items():
            E[k] = E.get(k, 0) + v
        extra = dict(self.extra)
        for k, v in other.extra.items():
            extra[k] = extra.get(k, 0) + v
        return GeometricDivisorClass(self.H + other.H, E, extra)

    def __neg__(self):
        return GeometricDivisorClass(-self.H, {k: -v for k, v in self.E.items()}, {k: -v for k, v in self.extra.items()})

    def __sub__(self, other):
        return self + (-other)


@dataclass(frozen=True)
class CurveClass:
    """``d h - sum a[gamma] e_gamma - sum extra[i] e_i``."""

    d: int = 0
    a: Mapping[frozenset, int] = field(default_factory=dict)
    extra: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "a", _clean({frozenset(k): v for k, v in self.a.items()}))
        object.__setattr__(self, "extra", _clean(self.extra))

    @classmethod
    def from_points(cls, n: int, d: int, a: Sequence[int]) -> "CurveClass":
        """Build ``d h - sum_i a_i e_i`` with 1-based point numbers."""
        toric = {frozenset({i}): ai for i, ai in enumerate(a[: n + 1])}
        extra = {i + 1: ai for i, ai in enumerate(a) if i >= n + 1}
        return cls(d, toric, extra)

    def toric_part(self) -> "CurveClass":
        return CurveClass(self.d, self.a)


@dataclass(frozen=True)
class GeometricBasis:
    """Ordered geometric bases ``[H, E_gamma..., E_i...]`` and ``[h, e_gamma..., e_i...]``."""

    n: int
    centers: tuple[frozenset, ...]
    extras: tuple[int, ...] = ()

    @classmethod
    def for_stage(cls, n: int, stage: int, m: int | None = None) -> "GeometricBasis":
        s = build_stage(n, stage)
        m = n + 1 if m is None else m
        if m < n + 1:
            raise ValueError("m must be at least n + 1")
        return cls(n, s.centers, tuple(range(n + 2, m + 1)))

    @property
    def rank(self) -> int:
        return 1 + len(self.centers) + len(self.extras)

    def _index(self) -> dict:
        idx = {c: 1 + i for i, c in enumerate(self.centers)}
        base = 1 + len(self.centers)
        idx.update({p: base + i for i, p in enumerate(self.extras)})
        return idx

    def divisor_vector(self, D: GeometricDivisorClass) -> list[int]:
        v = [0] * self.rank
        idx = self._index()
        v[0] = D.H
        for k, c in list(D.E.items()) + list(D.extra.items()):
            if k not in idx:
                raise KeyError(f"{k} is not in this basis")
            v[idx[k]] += c
        return v

    def divisor_from_vector(self, v: Sequence[int]) -> GeometricDivisorClass:
        nc = len(self.centers)
        return GeometricDivisorClass(
            int(v[0]),
            {c: int(v[1 + i]) for i, c in enumerate(self.centers)},
            {p: int(v[1 + nc + i]) for i, p in enumerate(self.extras)},
        )

    def curve_vector(self, C: CurveClass) -> list[int]:
        """Plain coordinates: the class is ``sum v_k * (basis curve k)``."""
        v = [0] * self.rank
        idx = self._index()
        v[0] = C.d
        for k, a in list(C.a.items()) + list(C.extra.items()):
            if k not in idx:
                raise KeyError(f"{k} is not in this basis")
            v[idx[k]] -= a
        return v

    def curve_from_vector(self, v: Sequence[int]) -> CurveClass:
        nc = len(self.centers)
        return CurveClass(
            int(v[0]),
            {c: -int(v[1 + i]) for i, c in enumerate(self.centers)},
            {p: -int(v[1 + nc + i]) for i, p in enumerate(self.extras)},
        )


@dataclass(frozen=True)
class BasisChange:
    """Toric <-> geometric divisor bases of one stage (extra points excluded).

    ``toric_to_geometric[k][rho]`` is the ``k``-th geometric coordinate of
    ``D_rho``; ``geometric_to_toric[rho][k]`` gives a toric representative of
    the ``k``-th geometric basis divisor. ``relations`` are the ``n`` linear
    relations ``sum_rho (e_i . rho) D_rho``.
    """

    basis: GeometricBasis
    toric_to_geometric: tuple[tuple[int, ...], ...]
    geometric_to_toric: tuple[tuple[int, ...], ...]
    relations: tuple[tuple[int, ...], ...]


def divisor_basis_change(s: StageFan) -> BasisChange:
    n = s.n
    basis = GeometricBasis(n, s.centers)
    idx = basis._index()
    nrays = len(s.labels)
    t2g = [[0] * nrays for _ in range(basis.rank)]
    for rho, alpha in enumerate(s.labels):
        if len(alpha) == 1:
            (i,) = alpha
            t2g[0][rho] = -1
            for gamma in s.centers:
                if i not in gamma:
                    t2g[idx[gamma]][rho] += 1
        else:
            t2g[idx[full_set(n) - alpha]][rho] = -1

    g2t = [[0] * basis.rank for _ in range(nrays)]
    # H = -D_{0} - sum_{gamma not containing 0} D_{[n] - gamma}
    g2t[s.ray_of({0})][0] = -1
    for gamma in s.centers:
        if 0 not in gamma:
            g2t[s.ray_of(full_set(n) - gamma)][0] -= 1
    for gamma in s.centers:
        g2t[s.ray_of(full_set(n) - gamma)][idx[gamma]] = -1

    relations = tuple(tuple(ray[i] for ray in s.fan.rays) for i in range(n))
    return BasisChange(
        basis,
        tuple(map(tuple, t2g)),
        tuple(map(tuple, g2t)),
        relations,
    )


def canonical_class(s: StageFan) -> GeometricDivisorClass:
    """``sum_rho D_rho`` expressed in the geometric basis."""
    bc = divisor_basis_change(s)
    v = [sum(row) for row in bc.toric_to_geometric]
    return bc.basis.divisor_from_vector(v)


def is_nonface(s: StageFan, rays: Iterable) -> bool:
    """True iff the rays (indices, or label sets) span no cone of the stage fan."""
    idx = set()
    for r in rays:
        idx.add(r if isinstance(r, int) else s.ray_of(r))
    return not s.fan.is_cone(idx)


@dataclass(frozen=True)
class PairingTable:
    """Divisor-by-curve intersection numbers in the geometric bases."""

    basis: GeometricBasis
    matrix: tuple[tuple[int, ...], ...]

    def pair(self, D: GeometricDivisorClass, C: CurveClass) -> int:
        x = self.basis.divisor_vector(D)
        y = self.basis.curve_vector(C)
        return sum(x[k] * self.matrix[k][l] * y[l] for k in range(len(x)) for l in range(len(y)) if x[k] and y[l])


class StageRing:
    """Everything intersection-theoretic about one toric stage.

    Built once per ``(n, stage)`` via :func:`stage_ring`.
    """

    def __init__(self, s: StageFan):
        self.stage = s
        self.basis_change = divisor_basis_change(s)
        self.basis = self.basis_change.basis
        self.walls: list[WallData] = enumerate_walls(s.fan)
        nrays = len(s.labels)
        rank = self.basis.rank
        if rank != nrays - s.n:
            raise RuntimeError("Picard rank mismatch: fan bug")

        # torus-invariant prime divisors are -D_rho
        g2t = self.basis_change.geometric_to_toric
        self.divisor_reps = [[-g2t[rho][k] for rho in range(nrays)] for k in range(rank)]

        # curve basis by duality: relation vectors c with Y c = target, sum c_rho rho = 0
        square = self.divisor_reps + [list(r) for r in self.basis_change.relations]
        try:
            inv = linalg.inverse(square)
        except ZeroDivisionError:
            raise RuntimeError("pairing singular: fan bug") from None
        curves = []
        for l in range(rank):
            sign = 1 if l == 0 else -1
            curves.append([sign * inv[rho][l] for rho in range(nrays)])
        self.curve_relations = linalg.as_int_matrix(curves)

        self.pairing_matrix = tuple(
            tuple(sum(a * b for a, b in zip(self.divisor_reps[k], self.curve_relations[l])) for l in range(rank))
            for k in range(rank)
        )

        wall_classes = []
        for w in self.walls:
            rel = [0] * nrays
            for i, c in w.relation:
                rel[i] = c
            pairings = [sum(a * b for a, b in zip(self.divisor_reps[k], rel)) for k in range(rank)]
            wall_classes.append(self._plain_from_pairings(pairings))
        self.wall_classes = wall_classes
        self.generators = sorted(set(map(tuple, wall_classes)))

    def _plain_from_pairings(self, pairings: Sequence[int]) -> list[int]:
        # plain coordinate l = pairing with basis divisor l divided by Q[l][l]
        return [p * self.pairing_matrix[k][k] for k, p in enumerate(pairings)]

    def wall_class(self, i: int) -> CurveClass:
        return self.basis.curve_from_vector(self.wall_classes[i])

    def relation_vector(self, C: CurveClass) -> list[int]:
        """Toric relation vector (over rays) representing a curve class."""
        v = self.basis.curve_vector(C)
        nrays = len(self.stage.labels)
        return [sum(v[l] * self.curve_relations[l][rho] for l in range(len(v))) for rho in range(nrays)]

    def toric_pairing(self, D: GeometricDivisorClass, C: CurveClass) -> int:
        """Pair via toric representatives, bypassing the pairing table."""
        x = self.basis.divisor_vector(D)
        rel = self.relation_vector(C)
        rep = [sum(x[k] * self.divisor_reps[k][rho] for k in range(len(x))) for rho in range(len(rel))]
        return sum(a * b for a, b in zip(rep, rel))

    def membership(self, plain: Sequence[int]) -> str:
        """Classify a plain coordinate vector against the cone of wall classes."""
        gens = self.generators
        rank = self.basis.rank
        total = [sum(g[k] for g in gens) for k in range(rank)]
        # maximise t subject to sum lam_w C_w + t * total = c, t + u = 1
        nv = len(gens) + 2
        a_eq = []
        for k in range(rank):
            a_eq.append([g[k] for g in gens] + [total[k], 0])
        a_eq.append([0] * len(gens) + [1, 1])
        b_eq = list(plain) + [1]
        obj = [0] * len(gens) + [1, 0]
        res = lp.maximize(obj, a_eq, b_eq)
        if not res.feasible:
            return "outside"
        return "interior" if res.value > 0 else "boundary"

    def separating_divisor(self, plain: Sequence[int]) -> tuple[int, ...] | None:
        """A nef divisor (geometric coordinates) pairing negatively with ``plain``.

        Returns None when ``plain`` lies in the Mori cone. The pairing is
        diagonal, so divisor coordinate ``k`` pairs as ``Q[k][k] * plain[k]``.
        """
        q = [self.pairing_matrix[k][k] for k in range(self.basis.rank)]
        gens = self.generators
        rank = self.basis.rank
        # y = p - u; g.y - s_g = 0 for each generator; c.y + t = -1
        a_eq = []
        for gi, g in enumerate(gens):
            w = [q[k] * g[k] for k in range(rank)]
            a_eq.append(w + [-x for x in w] + [-int(i == gi) for i in range(len(gens))] + [0])
        w = [q[k] * plain[k] for k in range(rank)]
        a_eq.append(w + [-x for x in w] + [0] * len(gens) + [1])
        b_eq = [0] * len(gens) + [-1]
        res = lp.feasible(a_eq, b_eq)
        if not res.feasible:
            return None
        y = [res.x[k] - res.x[rank + k] for k in range(rank)]
        scale = 1
        for v in y:
            scale = scale * v.denominator // gcd(scale, v.denominator)
        return tuple(int(v * scale) for v in y)

    def is_extremal(self, plain: Sequence[int]) -> bool:
        """Does ``plain`` span an extremal ray of the Mori cone?"""
        plain = list(plain)
        if not any(plain):
            return False
        gens = self.generators

        def proportional(g):
            return all(g[i] * plain[j] == g[j] * plain[i] for i in range(len(g)) for j in range(len(g))) and any(
                g[i] * plain[i] > 0 for i in range(len(g))
            )

        obj = [0 if proportional(g) else 1 for g in gens]
        a_eq = [[g[k] for g in gens] for k in range(len(plain))]
        res = lp.maximize(obj, a_eq, plain)
        return res.status == "optimal" and res.value == 0


@lru_cache(maxsize=None)
def stage_ring(n: int, stage: int) -> StageRing:
    return StageRing(build_stage(n, stage))


def _ring_for(s: StageFan) -> StageRing:
    if s is build_stage(s.n, s.stage) or s == build_stage(s.n, s.stage):
        return stage_ring(s.n, s.stage)
    return StageRing(s)


def extend_with_points(table: PairingTable, k: int) -> PairingTable:
    """Append ``k`` extra points: orthogonal blocks with ``E_i . e_i = -1``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return table
    b = table.basis
    start = (max(b.extras) + 1) if b.extras else b.n + 2
    basis = GeometricBasis(b.n, b.centers, b.extras + tuple(range(start, start + k)))
    old = len(table.matrix)
    rows = [list(r) + [0] * k for r in table.matrix]
    for i in range(k):
        row = [0] * (old + k)
        row[old + i] = -1
        rows.append(row)
    return PairingTable(basis, tuple(map(tuple, rows)))


def pairing(s: StageFan, extras: int = 0) -> PairingTable:
    ring = _ring_for(s)
    return extend_with_points(PairingTable(ring.basis, ring.pairing_matrix), extras)


def mori_membership(s: StageFan, c: CurveClass) -> str:
    """``"interior"``, ``"boundary"`` or ``"outside"`` the cone of effective curves."""
    if c.extra:
        raise ValueError("mori_membership takes classes without extra points")
    ring = _ring_for(s)
    return ring.membership(ring.basis.curve_vector(c))


def may_be_effective(s: StageFan, c: CurveClass) -> bool:
    """Necessary condition for effectivity on the blowup at extra points.

    Blowing down the extra points pushes an effective curve to an effective
    toric class; conversely any extra-point coefficients are reachable by
    adding fibre lines ``e_i`` or passing through the points, so the toric
    part is the only constraint this test can enforce.
    """
    return mori_membership(s, c.toric_part()) != "outside"
