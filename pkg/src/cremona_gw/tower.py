"""The iterated toric blowup tower  P^n <- X_0 <- X_1 <- ... <- X_{n-2}.

Torus fixed points of P^n are p_0..p_n and every torus-invariant centre is
named by the set ``gamma`` of fixed points it passes through. Stage ``j``
blows up the proper transforms of all centres with ``|gamma| == j + 1``
(points at stage 0, lines at stage 1, ...), so the last stage ``n - 2`` is
the permutohedral variety.

Ray labels are subsets ``alpha`` of ``{0..n}`` with ray ``sum(rho_i for i in
alpha)``. The exceptional divisor over centre ``gamma`` is the ray labelled
by the complement ``[n] - gamma``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .lattice_core import Fan, primitive, projective_space_fan, star_subdivision

Label = frozenset


def full_set(n: int) -> frozenset[int]:
    return frozenset(range(n + 1))


def label_key(s: Iterable[int]) -> tuple:
    s = sorted(s)
    return (len(s), tuple(s))


def centers(n: int, stage: int) -> tuple[frozenset[int], ...]:
    """Centre labels whose exceptional divisors exist at ``stage`` (sorted)."""
    top = min(stage + 1, n - 1)
    out = []
    for size in range(1, top + 1):
        out.extend(frozenset(c) for c in itertools.combinations(range(n + 1), size))
    return tuple(out)


def label_ray(n: int, alpha: Iterable[int]) -> tuple[int, ...]:
    """primitive(sum of the P^n rays rho_i, i in alpha)."""
    v = [0] * n
    for i in alpha:
        if i == 0:
            v = [x - 1 for x in v]
        else:
            v[i - 1] += 1
    return primitive(v)


@dataclass(frozen=True)
class StageFan:
    n: int
    stage: int
    fan: Fan
    labels: tuple[frozenset[int], ...]

    def ray_of(self, label: Iterable[int]) -> int:
        return self.labels.index(frozenset(label))

    @property
    def centers(self) -> tuple[frozenset[int], ...]:
        return centers(self.n, self.stage) if self.stage >= 0 else ()

    def to_dict(self) -> dict:
        d = self.fan.to_dict()
        d["labels"] = {str(i): sorted(lab) for i, lab in enumerate(self.labels)}
        return d


def projective_fan(n: int) -> StageFan:
    if n < 2:
        raise ValueError("tower undefined for n < 2")
    return StageFan(n, -1, projective_space_fan(n), tuple(frozenset({i}) for i in range(n + 1)))


def blow_up_centers(s: StageFan, gammas: Sequence[Iterable[int]], stage: int) -> StageFan:
    """Star-subdivide the cones of the given centres, in the order given."""
    n = s.n
    fan, labels = s.fan, list(s.labels)
    for gamma in gammas:
        gamma = frozenset(gamma)
        cone = [labels.index(frozenset({k})) for k in range(n + 1) if k not in gamma]
        fan = star_subdivision(fan, cone)
        label = full_set(n) - gamma
        assert fan.rays[-1] == label_ray(n, label)
        labels.append(label)
    return StageFan(n, stage, fan, tuple(labels))


@lru_cache(maxsize=None)
def build_stage(n: int, j: int) -> StageFan:
    """Fan of X_j (``j = -1`` is P^n itself)."""
    if n < 2:
        raise ValueError("tower undefined for n < 2")
    if not -1 <= j <= n - 2:
        raise ValueError(f"stage {j} out of range for n = {n}")
    if j == -1:
        return projective_fan(n)
    prev = build_stage(n, j - 1)
    gammas = sorted((c for c in centers(n, j) if len(c) == j + 1), key=label_key)
    return blow_up_centers(prev, gammas, j)


def final_stage(n: int) -> StageFan:
    return build_stage(n, n - 2)


def cremona_reflection(n: int) -> list[list[int]]:
    """The lattice map -Id, which swaps each ray label with its complement."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return [[-int(i == j) for j in range(n)] for i in range(n)]
