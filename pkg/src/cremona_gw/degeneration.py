"""Degeneration splittings and nonexceptionality certificates.

Degenerating X_j to the normal cone of the stage-(j+1) centres glues X_{j+1}
to bundles W_alpha along Z_alpha (``|alpha| = j + 2``). A class ``beta`` on
X_j may split as ``beta_1 + beta_2`` with ``beta_2`` a non-negative
combination of fibre lines ``e_alpha`` and the classes
``~e_gamma = e_gamma - sum_{gamma < eps < alpha, |eps| = j+1} e_eps`` of
curves in the copy of Z_alpha at infinity. If no such splitting leaves an
effective ``beta_1``, only the trivial splitting contributes and the
invariants of X_j and X_{j+1} agree.

Classes here use plain coefficients: ``coeffs[gamma]`` multiplies
``e_gamma``, with ``e_{} = h``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import lp
from .intersection import CurveClass, GeometricBasis, stage_ring
from .tower import full_set, label_key as _key

H = frozenset()


@dataclass(frozen=True)
class StageClass:
    """A curve class on X_j(m): ``sum coeffs[g] e_g + sum extra[i] e_i``."""

    n: int
    stage: int
    coeffs: Mapping[frozenset, int] = field(default_factory=dict)
    extra: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {frozenset(k): int(v) for k, v in self.coeffs.items() if v}
        whole = full_set(self.n)
        for g in coeffs:
            if not g < whole:
                raise ValueError(f"label {sorted(g)} is not a proper subset of [n]")
            if len(g) > self.stage + 1:
                raise ValueError(f"e_{sorted(g)} does not exist at stage {self.stage}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "extra", {int(k): int(v) for k, v in self.extra.items() if v})

    def _combine(self, other: "StageClass", sign: int) -> "StageClass":
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + sign * v
        e = dict(self.extra)
        for k, v in other.extra.items():
            e[k] = e.get(k, 0) + sign * v
        return StageClass(self.n, max(self.stage, other.stage), c, e)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rmul__(self, k: int):
        return StageClass(self.n, self.stage, {g: k * v for g, v in self.coeffs.items()}, {i: k * v for i, v in self.extra.items()})

    def lift(self, stage: int) -> "StageClass":
        return StageClass(self.n, stage, self.coeffs, self.extra)

    def to_curve_class(self) -> CurveClass:
        return CurveClass(
            self.coeffs.get(H, 0),
            {g: -v for g, v in self.coeffs.items() if g},
            {i: -v for i, v in self.extra.items()},
        )

    @classmethod
    def from_points(cls, n: int, d: int, a: Sequence[int], stage: int = 0) -> "StageClass":
        """``d h - sum a_i e_i`` with 1-based point numbers (points > n+1 are extra)."""
        coeffs = {H: d}
        extra = {}
        for i, ai in enumerate(a, start=1):
            if i <= n + 1:
                coeffs[frozenset({i - 1})] = -ai
            else:
                extra[i] = -ai
        return cls(n, stage, coeffs, extra)

    def describe(self) -> str:
        terms = []
        for g in sorted(self.coeffs, key=_key):
            name = "h" if not g else "e{" + ",".join(str(i) for i in sorted(g)) + "}"
            terms.append((self.coeffs[g], name))
        for i in sorted(self.extra):
            terms.append((self.extra[i], f"e{i}"))
        out = ""
        for c, name in terms:
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            out += f"{sign}{mag}{name}"
        return (out[1:] if out.startswith("+") else out) or "0"


def _check_labels(n: int, j: int, alpha: Iterable[int], gamma: Iterable[int]) -> tuple[frozenset, frozenset]:
    alpha, gamma = frozenset(alpha), frozenset(gamma)
    if len(alpha) != j + 2 or not alpha < full_set(n):
        raise ValueError(f"label size mismatch: |alpha| must be {j + 2}")
    if not gamma < alpha or len(gamma) > j:
        if gamma:
            raise ValueError(f"label size mismatch: gamma must be a subset of alpha of size <= {j}")
    return alpha, gamma


def _faces_between(gamma: frozenset, alpha: frozenset, size: int) -> list[frozenset]:
    rest = sorted(alpha - gamma)
    return [gamma | frozenset(c) for c in itertools.combinations(rest, size - len(gamma))]


def embedded_center_class(n: int, j: int, alpha: Iterable[int], gamma: Iterable[int] = ()) -> StageClass:
    """Class on X_{j+1} of the curve ``e_gamma`` of Z_alpha, lifted into E_alpha.

    ``e_gamma - sum_{gamma < eps < alpha, |eps| = j+1} e_eps + (j + 1 - |gamma|) e_alpha``
    """
    alpha, gamma = _check_labels(n, j, alpha, gamma)
    coeffs = {gamma: 1}
    for eps in _faces_between(gamma, alpha, j + 1):
        coeffs[eps] = coeffs.get(eps, 0) - 1
    coeffs[alpha] = j + 1 - len(gamma)
    return StageClass(n, j + 1, coeffs)


def tilde_class(n: int, j: int, alpha: Iterable[int], gamma: Iterable[int] = ()) -> StageClass:
    """The same curve in the copy of Z_alpha at infinity of W_alpha."""
    alpha, gamma = _check_labels(n, j, alpha, gamma)
    emb = embedded_center_class(n, j, alpha, gamma)
    return emb - (j + 1 - len(gamma)) * StageClass(n, j + 1, {alpha: 1})


@dataclass(frozen=True)
class SplittingCandidate:
    stage: int
    b: Mapping[frozenset, int]
    a: Mapping[tuple[frozenset, frozenset], int]
    beta1: StageClass

    def as_dict(self) -> dict:
        fmt = lambda s: "{" + ",".join(map(str, sorted(s))) + "}"
        return {
            "stage": self.stage,
            "b": {fmt(k): v for k, v in sorted(self.b.items(), key=lambda kv: _key(kv[0]))},
            "a": {f"{fmt(al)}:{fmt(g)}": v for (al, g), v in sorted(self.a.items(), key=lambda kv: (_key(kv[0][0]), _key(kv[0][1])))},
            "beta1": self.beta1.describe(),
        }


def splitting_directions(n: int, j: int) -> list[tuple[tuple, StageClass]]:
    """Ordered variables of the splitting formula with the classes they subtract."""
    out = []
    for alpha in itertools.combinations(range(n + 1), j + 2):
        alpha = frozenset(alpha)
        if alpha == full_set(n):
            continue
        out.append((("b", alpha), StageClass(n, j + 1, {alpha: 1})))
        gammas = [frozenset(g) for size in range(0, j + 1) for g in itertools.combinations(sorted(alpha), size)]
        for gamma in sorted(gammas, key=_key):
            out.append((("a", alpha, gamma), tilde_class(n, j, alpha, gamma)))
    return out


def _candidate(j: int, keys, values, beta1: StageClass) -> SplittingCandidate:
    b, a = {}, {}
    for key, v in zip(keys, values):
        if not v:
            continue
        if key[0] == "b":
            b[key[1]] = int(v)
        else:
            a[(key[1], key[2])] = int(v)
    return SplittingCandidate(j, b, a, beta1)


def enumerate_splittings(j: int, beta: StageClass, bound: int) -> list[SplittingCandidate]:
    """Every non-zero choice of coefficients in ``[0, bound]`` with its forced beta_1."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    if bound == 0:
        return []
    directions = splitting_directions(beta.n, j)
    keys = [k for k, _ in directions]
    base = beta.lift(j + 1)
    out = []
    for values in itertools.product(range(bound + 1), repeat=len(directions)):
        if not any(values):
            continue
        beta1 = base
        for v, (_, cls) in zip(values, directions):
            if v:
                beta1 = beta1 - v * cls
        out.append(_candidate(j, keys, values, beta1))
    return out


# --- certification -----------------------------------------------------------


class CertificateError(ValueError):
    """The requested extremality certificate cannot be issued for this class."""


@dataclass(frozen=True)
class Certificate:
    d: int
    a: tuple[int, ...]
    justification: str  # "declared-extremal" | "mori-verified-stage"
    note: str
    stages: tuple[int, ...] = ()


def is_rational_normal_family(n: int, d: int, a: Sequence[int]) -> bool:
    a = list(a)
    return d == n and sorted(x for x in a if x) == [1] * (n + 3) and all(x in (0, 1) for x in a)


def declared_certificate(n: int, d: int, a: Sequence[int]) -> Certificate:
    """Built-in extremality certificate for ``n h - e_1 - ... - e_{n+3}`` (up to relabelling)."""
    if not is_rational_normal_family(n, d, a):
        raise CertificateError("declared extremality is only available for the class n h - e_1 - ... - e_{n+3}")
    return Certificate(d, tuple(a), "declared-extremal", "asserted extremal in the source literature; not verified here")


def mori_certificate(n: int, d: int, a: Sequence[int]) -> Certificate:
    """Verify extremality of a toric class on each toric stage the argument uses."""
    a = list(a)
    if any(a[n + 1:]):
        raise CertificateError("mori verification needs a class without extra points")
    stages = tuple(range(0, max(1, n - 2)))
    for j in stages:
        ring = stage_ring(n, j)
        plain = ring.basis.curve_vector(StageClass.from_points(n, d, a[: n + 1], j).to_curve_class())
        if not ring.is_extremal(plain):
            raise CertificateError(f"class is not extremal in the Mori cone of stage {j}")
    return Certificate(d, tuple(a), "mori-verified-stage", "extremal ray of the toric Mori cone", stages)


@dataclass
class StageResult:
    stage: int
    variables: int
    candidates: int
    method: str
    effective_splittings: int
    status: str  # "passed" | "failed" | "undecided"

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CertResult:
    status: str  # "certified" | "inconclusive"
    stages: list[StageResult]
    witnesses: list[SplittingCandidate]
    certificate: Certificate | None
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def as_dict(self) -> dict:
        cert = None
        if self.certificate is not None:
            cert = {"justification": self.certificate.justification, "note": self.certificate.note, "stages": list(self.certificate.stages)}
        return {
            "status": self.status,
            "stages": [s.as_dict() for s in self.stages],
            "witnesses": [w.as_dict() for w in self.witnesses],
            "certificate": cert,
            "reason": self.reason,
        }


def _plain(basis: GeometricBasis, c: StageClass) -> list[int]:
    return basis.curve_vector(c.to_curve_class())


def _proportional_scale(vec: Sequence[int], beta: Sequence[int]) -> Fraction | None:
    """s with vec == s * beta, or None."""
    p = next((i for i, x in enumerate(beta) if x), None)
    if p is None:
        return None
    s = Fraction(vec[p], beta[p])
    if all(v == s * b for v, b in zip(vec, beta)):
        return s
    return None


def _relaxation_feasible(directions, beta_vec, bound, mode, ring, toric_len) -> bool:
    """LP relaxation of "some non-zero candidate is a witness" (sound to reject)."""
    k = len(directions)
    if mode == "extremal":
        # V x - s beta = 0, x <= bound, s <= 1, sum x >= 1
        dim = len(beta_vec)
        # columns: x (k), s, slack_x (k), slack_s, surplus
        nv = 2 * k + 3
        rows, rhs = [], []
        for i in range(dim):
            row = [0] * nv
            for c, v in enumerate(directions):
                row[c] = v[i]
            row[k] = -beta_vec[i]
            rows.append(row)
            rhs.append(0)
    else:
        gens = ring.generators
        g = len(gens)
        # V_t x + C lam = beta_t, x <= bound, sum x >= 1; columns: x, lam, slack_x, surplus
        nv = 2 * k + g + 1
        rows, rhs = [], []
        for i in range(toric_len):
            row = [0] * nv
            for c, v in enumerate(directions):
                row[c] = v[i]
            for c, gen in enumerate(gens):
                row[k + c] = gen[i]
            rows.append(row)
            rhs.append(beta_vec[i])
    off = k + 1 if mode == "extremal" else k + len(ring.generators)
    for c in range(k):
        row = [0] * nv
        row[c] = 1
        row[off + c] = 1
        rows.append(row)
        rhs.append(bound)
    if mode == "extremal":
        row = [0] * nv
        row[k] = 1
        row[off + k] = 1
        rows.append(row)
        rhs.append(1)
    row = [0] * nv
    for c in range(k):
        row[c] = 1
    row[nv - 1] = -1
    rows.append(row)
    rhs.append(1)
    return lp.feasible(rows, rhs).feasible


class _EffectivityOracle:
    """Exact Mori-cone test on toric parts, with cached nef separating divisors.

    Every class refuted by the LP leaves behind a nef divisor pairing
    negatively with it; later candidates are screened against all such
    divisors (plus H) by a vectorised dot product before any LP is run.
    """

    def __init__(self, ring, toric_len: int):
        self.ring = ring
        self.toric_len = toric_len
        self.q = np.array([ring.pairing_matrix[k][k] for k in range(toric_len)], dtype=np.int64)
        first = np.zeros(toric_len, dtype=np.int64)
        first[0] = 1  # H is nef
        self.cuts = first[None, :]
        self.verdicts: dict[tuple, bool] = {}

    def not_refuted(self, plain_rows: np.ndarray) -> np.ndarray:
        return ((plain_rows[:, : self.toric_len] @ self.cuts.T) >= 0).all(axis=1)

    def may_be_effective(self, plain: Sequence[int]) -> bool:
        key = tuple(plain[: self.toric_len])
        if key in self.verdicts:
            return self.verdicts[key]
        v = np.array(key, dtype=np.int64)
        if ((self.cuts @ v) < 0).any():
            verdict = False
        else:
            y = self.ring.separating_divisor(key)
            verdict = y is None
            if y is not None:
                self.cuts = np.vstack([self.cuts, self.q * np.array(y, dtype=np.int64)])
        self.verdicts[key] = verdict
        return verdict


def _decode(indices: np.ndarray, k: int, base: int) -> np.ndarray:
    digits = np.empty((len(indices), k), dtype=np.int64)
    rem = indices.copy()
    for c in range(k - 1, -1, -1):
        digits[:, c] = rem % base
        rem //= base
    return digits


def certify_nonexceptional(
    n: int,
    d: int,
    a: Sequence[int],
    certificate: str | Certificate | None = None,
    bound: int | None = None,
    enumeration_limit: int = 200_000,
    max_witnesses: int = 5,
) -> CertResult:
    """Certify ``d h - sum a_i e_i`` on X_0(m) as nonexceptional with respect to X_{n-2}(m).

    For each stage ``j = 0..n-3`` every non-zero splitting with coefficients
    in ``[0, bound]`` is examined. Without an extremality certificate a
    splitting counts as a witness when its ``beta_1`` may be effective. With
    a certificate ``beta`` spans an extremal ray, so both parts of an
    effective splitting would have to be multiples of ``beta``; only those
    splittings are witnesses. Small boxes are enumerated exhaustively;
    larger ones are rejected through an exact LP relaxation, and left
    undecided when the relaxation is feasible.
    """
    a = list(a)
    if bound is None:
        bound = max(d, 0)
    m = max(n + 1, len(a))
    a = a + [0] * (m - len(a))

    cert: Certificate | None = None
    mode = "none"
    if isinstance(certificate, Certificate):
        cert = certificate
    elif certificate in ("extremal", "declared", "declared-extremal"):
        try:
            cert = declared_certificate(n, d, a)
        except CertificateError as exc:
            return CertResult("inconclusive", [], [], None, str(exc))
    elif certificate == "mori":
        try:
            cert = mori_certificate(n, d, a)
        except CertificateError as exc:
            return CertResult("inconclusive", [], [], None, str(exc))
    elif certificate is not None:
        raise ValueError(f"unknown certificate kind {certificate!r}")
    if cert is not None:
        mode = "extremal"

    stages, witnesses = [], []
    beta0 = StageClass.from_points(n, d, a)
    for j in range(0, n - 2):
        directions = splitting_directions(n, j)
        basis = GeometricBasis.for_stage(n, j + 1, m)
        toric_len = 1 + len(basis.centers)
        ring = stage_ring(n, j + 1)
        beta_vec = _plain(basis, beta0.lift(j + 1))
        vecs = [_plain(basis, v) for _, v in directions]
        keys = [key for key, _ in directions]
        k = len(vecs)
        count = (bound + 1) ** k - 1

        if bound == 0:
            stages.append(StageResult(j, k, 0, "enumeration", 0, "passed"))
            continue
        if count > enumeration_limit:
            feasible = _relaxation_feasible(vecs, beta_vec, bound, mode, ring, toric_len)
            stages.append(StageResult(j, k, count, "lp-relaxation", 0, "undecided" if feasible else "passed"))
            continue

        found = 0
        oracle = _EffectivityOracle(ring, toric_len)
        V = np.array(vecs, dtype=np.int64)
        B = np.array(beta_vec, dtype=np.int64)
        chunk = 1 << 16
        for start in range(1, count + 1, chunk):
            idx = np.arange(start, min(start + chunk, count + 1), dtype=np.int64)
            X = _decode(idx, k, bound + 1)
            beta2 = X @ V
            if mode == "extremal":
                p = int(np.flatnonzero(B)[0]) if B.any() else 0
                mask = (beta2 * B[p] == np.outer(beta2[:, p], B)).all(axis=1)
            else:
                mask = oracle.not_refuted(B - beta2)
            for row in np.flatnonzero(mask):
                x = X[row]
                beta1_vec = [int(v) for v in B - beta2[row]]
                if mode == "extremal":
                    s = _proportional_scale([int(v) for v in beta2[row]], beta_vec)
                    if s is None or not 0 < s <= 1:
                        continue
                if not oracle.may_be_effective(beta1_vec):
                    continue
                found += 1
                if len(witnesses) < max_witnesses:
                    b1 = _stage_class_from_curve(n, j + 1, basis.curve_from_vector(beta1_vec))
                    witnesses.append(_candidate(j, keys, [int(v) for v in x], b1))
                if found >= max_witnesses:
                    break
            if found >= max_witnesses:
                break
        stages.append(StageResult(j, k, count, "enumeration", found, "failed" if found else "passed"))

    ok = all(s.status == "passed" for s in stages)
    reason = ""
    if not ok:
        if any(s.status == "failed" for s in stages):
            reason = "effective splitting found"
        else:
            reason = "search box too large and LP relaxation feasible"
    return CertResult("certified" if ok else "inconclusive", stages, witnesses, cert, reason)


def _stage_class_from_curve(n: int, stage: int, c: CurveClass) -> StageClass:
    coeffs = {H: c.d}
    coeffs.update({g: -v for g, v in c.a.items()})
    return StageClass(n, stage, coeffs, {i: -v for i, v in c.extra.items()})
