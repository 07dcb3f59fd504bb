"""Acceptance criteria, one test each, at the stated tolerances."""

import itertools
import time
from math import factorial

import numpy as np

from cremona_gw.cli import run
from cremona_gw.cremona import cremona_map, verify_consistency
from cremona_gw.degeneration import StageClass, certify_nonexceptional, embedded_center_class, splitting_directions
from cremona_gw.gw_engine import GWQuery, gw_pn, kontsevich_p2
from cremona_gw.intersection import CurveClass, GeometricBasis, GeometricDivisorClass, canonical_class, mori_membership, stage_ring
from cremona_gw.lattice_core import validate_fan
from cremona_gw.tower import build_stage, final_stage

F = frozenset


def test_criterion_1_corollary(report):
    results = []
    for n in (2, 3, 4):
        t0 = time.perf_counter()
        doc, code = run(["reproduce", "corollary", "--n", str(n)])
        elapsed = time.perf_counter() - t0
        results.append((n, code == 0 and doc.get("lhs") == doc.get("rhs") == "1" and elapsed < 60, elapsed))
    ok = all(r[1] for r in results)
    times = ", ".join(f"n={n} {t:.1f}s" for n, _, t in results)
    report(1, f"corollary reproduced with both sides 1 ({times})", ok)


def test_criterion_2_plane_counts(report):
    t0 = time.perf_counter()
    frozen = [1, 1, 12, 620, 87304, 26312976]
    wdvv = [gw_pn(GWQuery(2, d, (2,) * (3 * d - 1))) for d in range(1, 7)]
    kont = [kontsevich_p2(d) for d in range(1, 7)]
    elapsed = time.perf_counter() - t0
    report(2, f"P^2 counts d<=6 agree across engines ({elapsed:.1f}s)", wdvv == kont == frozen and elapsed < 120)


def test_criterion_3_fan_combinatorics(report):
    ok = True
    for n in (2, 3, 4, 5):
        rep = validate_fan(final_stage(n).fan)
        ok &= rep.ray_count == 2 ** (n + 1) - 2 and rep.max_cone_count == factorial(n + 1)
        ok &= rep.smooth and rep.complete
    report(3, "permutohedral fan rays, maximal cones, smooth, complete for n=2..5", ok)


def test_criterion_4_cross_derivation(report):
    failed = []
    for n in (2, 3, 4, 5):
        rep = verify_consistency(n, n + 3, samples=10_000, seed=n)
        if not rep.ok:
            failed.append((n, rep.checks, rep.counterexample))
    report(4, f"closed form equals fan pushforward on 10^4 classes, involution and adjunction, n=2..5 {failed or ''}", not failed)


def test_criterion_5_canonical_class(report):
    ok = True
    for n in (2, 3, 4, 5):
        for j in range(-1, n - 1):
            s = build_stage(n, j)
            ok &= canonical_class(s) == GeometricDivisorClass(-(n + 1), {g: n - len(g) for g in s.centers})
        K = canonical_class(final_stage(n))
        ok &= cremona_map(n, n + 1).pull(K) == K
    report(5, "canonical class at every stage n<=5 and fixed by the Cremona pullback", ok)


def test_criterion_6_pairing_identities(report):
    count, ok = 0, True
    for n in (2, 3, 4):
        for j in range(0, n - 2):
            ring = stage_ring(n, j + 1)
            for alpha in itertools.combinations(range(n + 1), j + 2):
                alpha = F(alpha)
                E_alpha = GeometricDivisorClass(0, {alpha: 1})
                ok &= ring.toric_pairing(E_alpha, StageClass(n, j + 1, {alpha: 1}).to_curve_class()) == -1
                for size in range(j + 1):
                    for g in itertools.combinations(sorted(alpha), size):
                        emb = embedded_center_class(n, j, alpha, g).to_curve_class()
                        ok &= ring.toric_pairing(E_alpha, emb) == -(j + 1 - size)
                        count += 1
    report(6, f"center pairing identities from wall relations, n<=4 ({count} triples)", ok and count > 0)


def test_criterion_7_mori_oracle(report):
    ring = stage_ring(2, 0)
    pts = [F({i}) for i in range(3)]
    expected = [CurveClass(0, {p: -1}) for p in pts]
    expected += [CurveClass(1, {p: 1, q: 1}) for p, q in itertools.combinations(pts, 2)]
    walls_ok = set(ring.generators) == {tuple(ring.basis.curve_vector(c)) for c in expected} and len(ring.generators) == 6
    outside = mori_membership(build_stage(2, 0), CurveClass(1, {p: 1 for p in pts})) == "outside"
    report(7, "n=2 wall classes are the six lines and h-e1-e2-e3 is outside the cone", walls_ok and outside)


def _proportional_hits(n, d, a, bound):
    """Count box points whose subtracted class is s * beta with 0 < s <= 1, by brute force."""
    m = max(n + 1, len(a))
    beta = StageClass.from_points(n, d, list(a) + [0] * (m - len(a)))
    hits = 0
    for j in range(0, n - 2):
        basis = GeometricBasis.for_stage(n, j + 1, m)
        V = np.array([basis.curve_vector(c.to_curve_class()) for _, c in splitting_directions(n, j)], dtype=np.int64)
        b = np.array(basis.curve_vector(beta.lift(j + 1).to_curve_class()), dtype=np.int64)
        p = int(np.flatnonzero(b)[0])
        k = len(V)
        head = min(k, 8)
        grid = np.array(list(itertools.product(range(bound + 1), repeat=head)), dtype=np.int64)
        partial = grid @ V[:head]
        for tail in itertools.product(range(bound + 1), repeat=k - head):
            w = partial + np.array(tail, dtype=np.int64) @ V[head:]
            prop = (w * b[p] == np.outer(w[:, p], b)).all(axis=1)
            scale = w[:, p] * np.sign(b[p])
            hits += int((prop & (scale > 0) & (scale <= abs(b[p]))).sum())
    return hits


def test_criterion_8_nonexceptional(report):
    ok = True
    for n in (2, 3):
        r = certify_nonexceptional(n, n, [1] * (n + 3), certificate="extremal", bound=n)
        # stages run from 0 to n - 3, so n = 2 has none
        ok &= r.certified and len(r.stages) == max(n - 2, 0)
        ok &= all(s.effective_splittings == 0 for s in r.stages)
    # the n = 3 box is cleared by the LP relaxation; enumerate it independently
    ok &= _proportional_hits(3, 3, [1] * 6, 3) == 0
    ok &= _proportional_hits(3, 1, [1, 1], 1) == 1  # h - e1 - e2 is itself a direction
    report(8, "n h - e1 - ... - e_{n+3} certified for n=2,3 with bound n and no effective splitting", ok)
