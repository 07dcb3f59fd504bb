"""Exact lattice geometry for simplicial fans in Z^n.

A fan is stored as a ray table (primitive integer vectors) plus its maximal
cones, each a sorted tuple of ray indices. Faces are never stored: every
fan here is simplicial, so any subset of a cone's rays spans a face.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from . import linalg

LatticeVector = tuple[int, ...]
Cone = tuple[int, ...]


class NotAFan(ValueError):
    """Raised when a collection of cones fails to meet along common faces."""


class NotAnAutomorphism(Exception):
    """A lattice map does not carry the fan onto itself.

    ``witness`` is a cone (tuple of ray indices) whose image is not a cone.
    """

    def __init__(self, witness: Cone, detail: str = ""):
        self.witness = witness
        super().__init__(detail or f"image of cone {witness} is not a cone of the fan")


def primitive(v: Iterable[int]) -> LatticeVector:
    """Divide an integer vector by the gcd of its entries.

    >>> primitive((2, 4))
    (1, 2)
    """
    v = tuple(int(x) for x in v)
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("not a ray direction: zero vector")
    return tuple(x // g for x in v)


@dataclass(frozen=True)
class Fan:
    dim: int
    rays: tuple[LatticeVector, ...]
    max_cones: tuple[Cone, ...]

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        cones = tuple(tuple(sorted(int(i) for i in c)) for c in self.max_cones)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", cones)
        for r in rays:
            if len(r) != self.dim:
                raise ValueError(f"ray {r} has wrong length for dimension {self.dim}")
            if primitive(r) != r:
                raise ValueError(f"ray {r} is not primitive")
        if len(set(rays)) != len(rays):
            raise ValueError("duplicate rays")
        used = set()
        for c in cones:
            if not c or len(set(c)) != len(c):
                raise ValueError(f"malformed cone {c}")
            if c[0] < 0 or c[-1] >= len(rays):
                raise ValueError(f"cone {c} refers to a missing ray")
            used.update(c)
        if used != set(range(len(rays))):
            raise ValueError("every ray must lie in some maximal cone")

    def ray_index(self, v: Sequence[int]) -> int:
        return self.rays.index(tuple(v))

    def is_cone(self, c: Iterable[int]) -> bool:
        s = set(c)
        return any(s <= set(m) for m in self.max_cones)

    def cones_containing(self, c: Iterable[int]) -> list[int]:
        s = set(c)
        return [i for i, m in enumerate(self.max_cones) if s <= set(m)]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "rays": [list(r) for r in self.rays],
            "max_cones": [list(c) for c in self.max_cones],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Fan":
        return cls(int(data["dim"]), tuple(map(tuple, data["rays"])), tuple(map(tuple, data["max_cones"])))


@dataclass(frozen=True)
class FanReport:
    smooth: bool
    complete: bool
    ray_count: int
    max_cone_count: int


@dataclass(frozen=True)
class WallData:
    """A codimension-one cone with its two neighbours and their linear relation.

    ``relation`` lists ``(ray index, coefficient)`` pairs with
    ``sum(c * rays[i]) == 0``; the two rays off the wall carry coefficient 1.
    """

    wall: Cone
    adjacent: tuple[int, int]
    relation: tuple[tuple[int, int], ...]

    def coefficient(self, ray: int) -> int:
        for i, c in self.relation:
            if i == ray:
                return c
        return 0


def _facet_map(f: Fan) -> dict[Cone, list[int]]:
    facets: dict[Cone, list[int]] = {}
    for ci, c in enumerate(f.max_cones):
        for k in range(len(c)):
            facets.setdefault(c[:k] + c[k + 1:], []).append(ci)
    return facets


def _is_unimodular_cone(rays: list[LatticeVector]) -> bool:
    k = len(rays)
    n = len(rays[0])
    if k == n:
        return abs(linalg.det(rays)) == 1
    g = 0
    for cols in itertools.combinations(range(n), k):
        g = gcd(g, linalg.det([[r[j] for j in cols] for r in rays]))
        if g == 1:
            return True
    return False


def _hyperplane_normal(rays: list[LatticeVector]) -> list[int]:
    (normal,) = linalg.nullspace(rays)
    return linalg.primitive_integer(normal)


def validate_fan(f: Fan, samples: int = 1000, seed: int = 0) -> FanReport:
    """Check smoothness and completeness of a simplicial fan.

    Completeness combines two tests: every facet of a maximal cone must be
    shared by exactly two maximal cones lying on opposite sides of it, and a
    seeded sample of random lattice vectors must each land in some maximal
    cone. A sample lying in the interior of two different cones, a facet
    shared by three cones, or two neighbours on the same side of their
    common facet raises :class:`NotAFan`.
    """
    n = f.dim
    smooth = True
    for c in f.max_cones:
        rays = [f.rays[i] for i in c]
        if len(c) > n or linalg.rank(rays) != len(c):
            raise NotAFan(f"not a fan: cone {c} is not simplicial")
        if not _is_unimodular_cone(rays):
            smooth = False

    full = all(len(c) == n for c in f.max_cones)
    two_sided = full
    if full:
        for facet, owners in _facet_map(f).items():
            if len(owners) > 2:
                raise NotAFan(f"not a fan: facet {facet} lies in {len(owners)} maximal cones")
            if len(owners) == 1:
                two_sided = False
                continue
            normal = _hyperplane_normal([f.rays[i] for i in facet]) if facet else None
            sides = []
            for ci in owners:
                (off,) = set(f.max_cones[ci]) - set(facet)
                s = sum(a * b for a, b in zip(normal, f.rays[off])) if normal else 1
                sides.append(s)
            if sides[0] * sides[1] >= 0:
                raise NotAFan(f"not a fan: cones {owners} overlap across facet {facet}")

    covered = False
    if full:
        # point location: x lies in cone c iff adj(c) @ x has the sign of det(c) everywhere
        adjs = []
        for c in f.max_cones:
            basis = [list(f.rays[i]) for i in c]  # rows are rays
            d = linalg.det(basis)
            inv = linalg.inverse(linalg.transpose(basis))
            adj = linalg.as_int_matrix([[x * d for x in row] for row in inv])
            sgn = 1 if d > 0 else -1
            adjs.append([[sgn * x for x in row] for row in adj])
        adj_arr = np.array(adjs, dtype=np.int64)
        rng = np.random.default_rng(seed)
        pts = rng.integers(-10**6, 10**6, size=(samples, n), endpoint=True)
        coords = np.einsum("cij,sj->csi", adj_arr, pts)
        inside = (coords >= 0).all(axis=2)
        strict = (coords > 0).all(axis=2)
        if (strict.sum(axis=0) > 1).any():
            raise NotAFan("not a fan: sampled point interior to two maximal cones")
        covered = bool(inside.any(axis=0).all())

    return FanReport(
        smooth=smooth,
        complete=bool(full and two_sided and covered),
        ray_count=len(f.rays),
        max_cone_count=len(f.max_cones),
    )


def star_subdivision(f: Fan, cone: Iterable[int]) -> Fan:
    """Insert the ray through the sum of ``cone``'s rays.

    Each maximal cone containing ``cone`` is replaced by the cones spanned by
    the new ray and those facets of the old cone that do not contain ``cone``.
    """
    c = tuple(sorted(set(cone)))
    owners = f.cones_containing(c)
    if not c or not owners:
        raise ValueError(f"{c} is not a cone of the fan")
    if len(c) == 1:
        return f
    new_ray = primitive(map(sum, zip(*(f.rays[i] for i in c))))
    if new_ray in f.rays:
        raise ValueError(f"subdivision ray {new_ray} already present")
    new_index = len(f.rays)
    cones: list[Cone] = []
    owner_set = set(owners)
    for ci, m in enumerate(f.max_cones):
        if ci not in owner_set:
            cones.append(m)
            continue
        for i in c:
            cones.append(tuple(sorted((set(m) - {i}) | {new_index})))
    return Fan(f.dim, f.rays + (new_ray,), tuple(cones))


def enumerate_walls(f: Fan) -> list[WallData]:
    """All codimension-one cones of a complete smooth fan with their relations."""
    out = []
    for facet, owners in sorted(_facet_map(f).items()):
        if len(owners) != 2:
            raise ValueError(f"fan not complete: facet {facet} lies in {len(owners)} maximal cones")
        (u,) = set(f.max_cones[owners[0]]) - set(facet)
        (v,) = set(f.max_cones[owners[1]]) - set(facet)
        idx = [u, v, *facet]
        cols = [f.rays[i] for i in idx]
        kernel = linalg.nullspace(linalg.transpose(cols))
        if len(kernel) != 1:
            raise ValueError(f"degenerate wall {facet}")
        rel = linalg.primitive_integer(kernel[0])
        if rel[0] < 0:
            rel = [-x for x in rel]
        if rel[0] != 1 or rel[1] != 1:
            raise ValueError(f"fan not smooth at wall {facet}")
        relation = tuple(sorted((i, c) for i, c in zip(idx, rel) if c != 0))
        out.append(WallData(facet, (owners[0], owners[1]), relation))
    return out


def apply_lattice_map(f: Fan, matrix: Sequence[Sequence[int]]) -> tuple[Fan, tuple[int, ...]]:
    """Check that ``matrix`` is an automorphism of ``f``.

    Returns the fan together with the induced ray permutation
    ``perm[i] = j`` where ``matrix @ rays[i] == rays[j]``. Raises
    :class:`NotAnAutomorphism` with a witness cone otherwise.
    """
    m = [list(row) for row in matrix]
    if len(m) != f.dim or any(len(row) != f.dim for row in m):
        raise ValueError("matrix has the wrong shape")
    if abs(linalg.det(m)) != 1:
        raise ValueError("not unimodular")
    index = {r: i for i, r in enumerate(f.rays)}
    perm = []
    for i, r in enumerate(f.rays):
        image = tuple(linalg.matvec(m, r))
        if image not in index:
            raise NotAnAutomorphism((i,), f"image {image} of ray {i} is not a ray")
        perm.append(index[image])
    cones = set(f.max_cones)
    for c in f.max_cones:
        if tuple(sorted(perm[i] for i in c)) not in cones:
            raise NotAnAutomorphism(c)
    return f, tuple(perm)


def projective_space_fan(n: int) -> Fan:
    rays = [tuple([-1] * n)] + [tuple(int(i == j) for j in range(n)) for i in range(n)]
    cones = [tuple(sorted(set(range(n + 1)) - {i})) for i in range(n + 1)]
    return Fan(n, tuple(rays), tuple(cones))
