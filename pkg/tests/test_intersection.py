import itertools
import random

import numpy as np
import pytest
from scipy.optimize import linprog

from cremona_gw import linalg
from cremona_gw.intersection import (
    CurveClass,
    GeometricBasis,
    GeometricDivisorClass,
    canonical_class,
    divisor_basis_change,
    extend_with_points,
    is_nonface,
    may_be_effective,
    mori_membership,
    pairing,
    stage_ring,
)
from cremona_gw.tower import build_stage, full_set


def E(*labels):
    return GeometricDivisorClass(0, {frozenset(l): 1 for l in labels})


def e(*labels):
    return CurveClass(0, {frozenset(l): -1 for l in labels})


h = CurveClass(1)
H = GeometricDivisorClass(1)

STAGES = [(n, j) for n in range(2, 6) for j in range(0, n - 1)]
SMALL_STAGES = [(n, j) for (n, j) in STAGES if n <= 4]


def test_basis_change_examples():
    s = build_stage(3, 0)
    bc = divisor_basis_change(s)
    for i in range(4):
        rho = s.ray_of(full_set(3) - {i})
        col = [row[rho] for row in bc.toric_to_geometric]
        assert bc.basis.divisor_from_vector(col) == -E({i})
    s = build_stage(3, 1)
    bc = divisor_basis_change(s)
    for i, j in itertools.combinations(range(4), 2):
        rho = s.ray_of(full_set(3) - {i, j})
        col = [row[rho] for row in bc.toric_to_geometric]
        assert bc.basis.divisor_from_vector(col) == -E({i, j})


@pytest.mark.parametrize("n,j", STAGES)
def test_linear_relations_vanish(n, j):
    bc = divisor_basis_change(build_stage(n, j))
    for rel in bc.relations:
        assert linalg.matvec(bc.toric_to_geometric, rel) == [0] * bc.basis.rank


@pytest.mark.parametrize("n,j", STAGES)
def test_basis_change_round_trip(n, j):
    bc = divisor_basis_change(build_stage(n, j))
    g2t = linalg.transpose(bc.geometric_to_toric)  # rank x nrays
    # geometric -> toric -> geometric is the identity
    assert linalg.matmul(bc.toric_to_geometric, linalg.transpose(g2t)) == linalg.identity(bc.basis.rank)
    # toric -> geometric -> toric differs from the identity by linear relations
    back = linalg.matmul(linalg.transpose(g2t), bc.toric_to_geometric)
    nrays = len(back)
    lattice_rank = linalg.rank([list(r) for r in bc.relations])
    for rho in range(nrays):
        diff = [back[k][rho] - int(k == rho) for k in range(nrays)]
        assert linalg.rank([list(r) for r in bc.relations] + [diff]) == lattice_rank


@pytest.mark.parametrize("n,j", STAGES)
def test_canonical_class(n, j):
    s = build_stage(n, j)
    K = canonical_class(s)
    expected = GeometricDivisorClass(-(n + 1), {g: n - len(g) for g in s.centers})
    assert K == expected


def test_canonical_examples():
    for n in (2, 3, 4):
        K = canonical_class(build_stage(n, 0))
        assert K == GeometricDivisorClass(-(n + 1), {frozenset({i}): n - 1 for i in range(n + 1)})


@pytest.mark.parametrize("n,j", STAGES)
def test_pairing_is_dual_basis(n, j):
    table = pairing(build_stage(n, j))
    rank = table.basis.rank
    assert table.matrix == tuple(tuple((1 if k == 0 else -1) if k == l else 0 for l in range(rank)) for k in range(rank))


def test_pairing_examples():
    s = build_stage(3, 1)
    t = pairing(s)
    assert t.pair(H, h) == 1
    assert t.pair(E({1, 2}), e({1, 2})) == -1
    t2 = pairing(s, 2)
    for p in (5, 6):
        Ep = GeometricDivisorClass(0, {}, {p: 1})
        assert t2.pair(Ep, h) == 0
        assert t2.pair(Ep, e({1, 2})) == 0
        assert t2.pair(H, CurveClass(0, {}, {p: -1})) == 0
        assert t2.pair(Ep, CurveClass(0, {}, {p: -1})) == -1


def test_extend_with_points():
    t = pairing(build_stage(3, 1))
    assert extend_with_points(t, 0) is t
    t2 = extend_with_points(t, 2)
    assert t2.basis.rank == t.basis.rank + 2 and len(t2.matrix) == len(t.matrix) + 2
    assert abs(linalg.det([list(r) for r in t2.matrix])) == 1
    with pytest.raises(ValueError):
        extend_with_points(t, -1)


@pytest.mark.parametrize("n,j", STAGES)
def test_anticanonical_degrees(n, j):
    s = build_stage(n, j)
    K = canonical_class(s)
    t = pairing(s)
    assert -t.pair(K, h) == n + 1
    for g in s.centers:
        assert -t.pair(K, e(g)) == n - len(g)


@pytest.mark.parametrize("n,j", SMALL_STAGES)
def test_toric_route_matches_table(n, j):
    s = build_stage(n, j)
    ring = stage_ring(n, j)
    t = pairing(s)
    divisors = [H] + [E(g) for g in s.centers]
    for w in range(len(ring.walls)):
        C = ring.wall_class(w)
        for D in divisors:
            assert ring.toric_pairing(D, C) == t.pair(D, C)


@pytest.mark.parametrize("n,j", SMALL_STAGES)
def test_basis_curves_effective(n, j):
    s = build_stage(n, j)
    assert mori_membership(s, h) != "outside"
    for g in s.centers:
        assert mori_membership(s, e(g)) != "outside"


def test_nonface_examples():
    assert is_nonface(build_stage(2, -1), [0, 1, 2])
    s = build_stage(2, 0)
    # rho_{1} = (1, 0) and rho_{0,2} = (-1, 0) are opposite
    assert is_nonface(s, [frozenset({1}), frozenset({0, 2})])
    assert not is_nonface(s, [frozenset({1}), frozenset({1, 2})])
    for i in range(len(s.labels)):
        assert not is_nonface(s, [i])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_nonface_iff_not_a_chain(n):
    s = build_stage(n, n - 2)
    for size in (2, 3):
        for combo in itertools.combinations(s.labels, size):
            chain = all(a < b or b < a for a, b in itertools.combinations(combo, 2))
            assert is_nonface(s, combo) == (not chain)


def test_hexagon_wall_classes():
    ring = stage_ring(2, 0)
    got = set(ring.generators)
    pts = [frozenset({i}) for i in range(3)]
    expected = [CurveClass(0, {p: -1}) for p in pts]
    expected += [CurveClass(1, {p: 1, q: 1}) for p, q in itertools.combinations(pts, 2)]
    assert got == {tuple(ring.basis.curve_vector(c)) for c in expected}
    assert len(got) == 6


def test_mori_examples():
    s = build_stage(2, 0)
    line12 = CurveClass(1, {frozenset({1}): 1, frozenset({2}): 1})
    assert mori_membership(s, line12) in ("interior", "boundary")
    three = CurveClass(1, {frozenset({i}): 1 for i in range(3)})
    assert mori_membership(s, three) == "outside"
    for n in (2, 3, 4):
        for j in range(0, n - 1):
            assert mori_membership(build_stage(n, j), h) != "outside"
    with pytest.raises(ValueError):
        mori_membership(s, CurveClass(1, {}, {4: 1}))


def test_may_be_effective_extra_points():
    s = build_stage(2, 0)
    assert may_be_effective(s, CurveClass(1, {}, {4: 1, 5: 1}))
    assert may_be_effective(s, CurveClass(0, {}, {4: -1}))
    assert not may_be_effective(s, CurveClass(-1, {}, {4: 1}))


def _scipy_member(gens, c):
    gens = np.array(gens, dtype=float).T
    res = linprog(np.zeros(gens.shape[1]), A_eq=gens, b_eq=np.array(c, dtype=float), bounds=(0, None), method="highs")
    return res.status == 0


@pytest.mark.parametrize("n,j", [(2, 0), (3, 0), (3, 1)])
def test_membership_against_scipy(n, j):
    ring = stage_ring(n, j)
    rng = random.Random(7 * n + j)
    seen = set()
    for _ in range(120):
        v = [rng.randint(-3, 3) for _ in range(ring.basis.rank)]
        ours = ring.membership(v) != "outside"
        assert ours == _scipy_member(ring.generators, v), v
        seen.add(ours)
    assert seen == {True, False}


@pytest.mark.parametrize("n,j", [(2, 0), (3, 0), (3, 1)])
def test_generators_extremal_or_not(n, j):
    ring = stage_ring(n, j)
    # a generator is extremal iff it is not a positive combination of the others
    for g in ring.generators:
        others = [x for x in ring.generators if x != g and not all(a * b >= 0 and a * g[0] == b * x[0] for a, b in zip(g, x))]
        decomposable = _scipy_member(others, g) if others else False
        assert ring.is_extremal(g) == (not decomposable)
        assert ring.membership(g) == "boundary"
