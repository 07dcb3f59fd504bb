"""The Cremona involution on the permutohedral variety and its blowups.

Two independent routes to the action on curve classes live here:

* :func:`curve_pushforward` derives it from the fan: the reflection ``-Id``
  permutes rays, which conjugated through the divisor basis change gives
  ``tau^*`` on divisors, and adjunction under the pairing gives ``tau_*``;
* :func:`cremona_transform_class` is the closed-form degree/multiplicity
  formula.

:func:`verify_consistency` checks one against the other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from . import linalg
from .intersection import (
    CurveClass,
    GeometricBasis,
    GeometricDivisorClass,
    canonical_class,
    pairing,
    stage_ring,
)
from .lattice_core import apply_lattice_map
from .tower import cremona_reflection, final_stage, full_set


@dataclass(frozen=True)
class CremonaMap:
    """Matrices act on coordinate columns in the bases of ``basis``."""

    n: int
    m: int
    basis: GeometricBasis
    div_pullback: tuple[tuple[int, ...], ...]
    curve_pushforward: tuple[tuple[int, ...], ...]

    def pull(self, D: GeometricDivisorClass) -> GeometricDivisorClass:
        return self.basis.divisor_from_vector(linalg.matvec(self.div_pullback, self.basis.divisor_vector(D)))

    def push(self, C: CurveClass) -> CurveClass:
        return self.basis.curve_from_vector(linalg.matvec(self.curve_pushforward, self.basis.curve_vector(C)))


def _check_m(n: int, m: int) -> None:
    if n < 2:
        raise ValueError("n must be at least 2")
    if m < n + 1:
        raise ValueError("m must be at least n + 1")


@lru_cache(maxsize=None)
def _divisor_matrix(n: int) -> tuple[tuple[int, ...], ...]:
    s = final_stage(n)
    _, perm = apply_lattice_map(s.fan, cremona_reflection(n))
    for i, j in enumerate(perm):
        assert s.labels[j] == full_set(n) - s.labels[i]
    bc = stage_ring(n, n - 2).basis_change
    rank = bc.basis.rank
    nrays = len(perm)
    cols = []
    for k in range(rank):
        x = [bc.geometric_to_toric[rho][k] for rho in range(nrays)]
        y = [0] * nrays
        for rho, v in enumerate(x):
            y[perm[rho]] += v
        cols.append(linalg.matvec(bc.toric_to_geometric, y))
    return tuple(map(tuple, linalg.transpose(cols)))


def induced_divisor_action(n: int, m: int) -> tuple[GeometricBasis, tuple[tuple[int, ...], ...]]:
    """``tau^*`` on ``[H, E_gamma..., E_i...]`` (extra ``E_i`` fixed)."""
    _check_m(n, m)
    base = _divisor_matrix(n)
    basis = GeometricBasis.for_stage(n, n - 2, m)
    k = m - n - 1
    rows = [list(r) + [0] * k for r in base]
    for i in range(k):
        rows.append([0] * len(base) + [int(i == j) for j in range(k)])
    return basis, tuple(map(tuple, rows))


@lru_cache(maxsize=None)
def cremona_map(n: int, m: int) -> CremonaMap:
    basis, a = induced_divisor_action(n, m)
    q = pairing(final_stage(n), m - n - 1).matrix
    qinv = linalg.as_int_matrix(linalg.inverse(q))
    b = linalg.matmul(linalg.matmul(qinv, linalg.transpose(a)), q)
    return CremonaMap(n, m, basis, a, tuple(map(tuple, b)))


def curve_pushforward(n: int, m: int) -> CremonaMap:
    """The adjoint of ``tau^*`` under the (unimodular) pairing."""
    _check_m(n, m)
    return cremona_map(n, m)


def cremona_transform_class(n: int, m: int, d: int, a: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Image of ``d h - sum a_i e_i`` (points 1..m) under the Cremona symmetry.

    >>> cremona_transform_class(3, 6, 3, [1] * 6)
    (1, (0, 0, 0, 0, 1, 1))
    """
    _check_m(n, m)
    if len(a) > m:
        raise ValueError("more multiplicities than points")
    a = list(a) + [0] * (m - len(a))
    s = sum(a[: n + 1])
    d_new = n * d - (n - 1) * s
    a_new = [d - (s - a[i]) for i in range(n + 1)] + a[n + 1:]
    return d_new, tuple(a_new)


def anticanonical_degree(n: int, C: CurveClass) -> int:
    """``-K . C`` on the permutohedral variety blown up at extra points."""
    K = canonical_class(final_stage(n))
    value = -K.H * C.d
    for gamma, a in C.a.items():
        value -= K.E.get(gamma, 0) * a
    # each extra point contributes (n - 1) E_i to K
    value -= (n - 1) * sum(C.extra.values())
    return value


def point_class(n: int, d: int, a: Sequence[int]) -> CurveClass:
    return CurveClass.from_points(n, d, a)


@dataclass
class ConsistencyReport:
    n: int
    m: int
    checks: dict[str, bool] = field(default_factory=dict)
    counterexample: dict | None = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_consistency(n: int, m: int, samples: int = 1000, seed: int = 0, max_coeff: int = 20) -> ConsistencyReport:
    """Cross-check the fan-derived Cremona action against the closed form.

    Checks, over ``samples`` seeded random classes ``d h - sum a_i e_i``:
    closed form equals matrix pushforward, the image has no component on
    centres of size >= 2, and ``-K`` degree is preserved. Also checks that
    both matrices are involutions and adjoint under the pairing.
    """
    if not 2 <= n <= 5:
        raise ValueError("verify_consistency supports 2 <= n <= 5")
    cm = curve_pushforward(n, m)
    report = ConsistencyReport(n, m)
    size = cm.basis.rank
    ident = linalg.identity(size)
    A, B = [list(r) for r in cm.div_pullback], [list(r) for r in cm.curve_pushforward]
    report.checks["divisor_involution"] = linalg.matmul(A, A) == ident
    report.checks["curve_involution"] = linalg.matmul(B, B) == ident
    q = pairing(final_stage(n), m - n - 1).matrix
    # <tau^* D, beta> == <D, tau_* beta> on every basis pair
    lhs = linalg.matmul(linalg.transpose(A), q)
    rhs = linalg.matmul(q, B)
    report.checks["adjunction"] = lhs == rhs
    K = canonical_class(final_stage(n))
    Kx = cm.basis.divisor_vector(K + GeometricDivisorClass(0, {}, {i: n - 1 for i in cm.basis.extras}))
    report.checks["canonical_fixed"] = linalg.matvec(A, Kx) == Kx

    rng = random.Random(seed)
    closed_ok = span_ok = degree_ok = True
    for _ in range(samples):
        d = rng.randint(-max_coeff, max_coeff)
        a = [rng.randint(-max_coeff, max_coeff) for _ in range(m)]
        beta = point_class(n, d, a)
        image = cm.push(beta)
        d2, a2 = cremona_transform_class(n, m, d, a)
        expected = point_class(n, d2, a2)
        if any(len(g) >= 2 for g in image.a):
            span_ok = False
        if image != expected:
            closed_ok = False
        if anticanonical_degree(n, image) != anticanonical_degree(n, beta):
            degree_ok = False
        if not (closed_ok and span_ok and degree_ok):
            report.counterexample = {"d": d, "a": a, "matrix_image": _describe(image), "closed_form": [d2, list(a2)]}
            break
    report.checks["closed_form_matches_matrix"] = closed_ok
    report.checks["image_in_point_span"] = span_ok
    report.checks["anticanonical_degree_preserved"] = degree_ok
    return report


def _describe(C: CurveClass) -> dict:
    return {
        "d": C.d,
        "a": {",".join(map(str, sorted(k))): v for k, v in sorted(C.a.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))},
        "extra": {str(k): v for k, v in sorted(C.extra.items())},
    }
