import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from cremona_gw.gw_engine import (
    GWQuery,
    _wdvv_side,
    NoIntegralR,
    NotTradeable,
    gw_invariant,
    gw_pn,
    kontsevich_p2,
    stationary,
    symmetry_check,
    trade_points,
    wdvv_residual,
    point_insertions_for_vdim_zero,
)

# frozen from kontsevich_p2 (independent recursion)
P2_COUNTS = [1, 1, 12, 620, 87304, 26312976]


def test_kontsevich_oracle():
    assert [kontsevich_p2(d) for d in range(1, 7)] == P2_COUNTS
    with pytest.raises(ValueError):
        kontsevich_p2(0)


@pytest.mark.parametrize("d", range(1, 7))
def test_p2_matches_kontsevich(d):
    assert gw_pn(GWQuery(2, d, (2,) * (3 * d - 1))) == kontsevich_p2(d)


def test_examples():
    assert gw_invariant(3, 3, [3] * 6) == 1
    assert gw_invariant(2, 3, [2] * 8) == 12
    assert gw_invariant(4, 0, [2, 2]) == 0
    with pytest.raises(ValueError, match="use divisor/fundamental axioms externally"):
        gw_invariant(3, 0, [3, 2, 1])
    with pytest.raises(ValueError):
        gw_invariant(3, 1, [4, 3])


@pytest.mark.parametrize("n", [3, 4, 5])
def test_lines_meeting_codim_two_planes(n):
    # degree of the Grassmannian G(2, n+1) is the Catalan number C_{n-1}
    catalan = comb(2 * (n - 1), n - 1) // n
    assert gw_invariant(n, 1, [2] * (2 * n - 2)) == catalan


def test_classical_p3_counts():
    assert gw_invariant(3, 2, [2] * 8) == 92  # conics meeting 8 lines
    assert gw_invariant(3, 3, [2] * 12) == 80160  # twisted cubics meeting 12 lines
    assert gw_invariant(3, 1, [3, 3]) == 1
    assert gw_invariant(3, 1, [3, 2, 2]) == 1


def test_stationary():
    for n in (2, 3, 4, 5):
        s = stationary(n, n)
        assert (s.r, s.N) == (n + 3, 1)
    assert stationary(2, 4).r == 11 and stationary(2, 4).N == 620
    with pytest.raises(NoIntegralR):
        stationary(4, 2)
    assert stationary(3, 2).N == 0  # 4 general points are not coplanar
    assert stationary(3, 4).N == 4
    with pytest.raises(ValueError):
        stationary(1, 1)


@given(st.integers(2, 4), st.integers(0, 3), st.lists(st.integers(2, 4), min_size=1, max_size=8), st.randoms())
@settings(max_examples=60, deadline=None)
def test_order_independent_and_gate(n, d, ins, rnd):
    ins = [min(a, n) for a in ins]
    q = GWQuery(n, d, tuple(ins))
    shuffled = ins[:]
    rnd.shuffle(shuffled)
    assert gw_invariant(n, d, shuffled) == gw_pn(q)
    if not q.passes_dimension_gate():
        assert gw_pn(q) == 0
    assert q.insertions == tuple(sorted(ins, reverse=True))


@pytest.mark.parametrize("n,d", [(2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2)])
def test_wdvv_symmetric(n, d):
    rng = random.Random(n * 100 + d)
    checked = nonzero = 0
    for _ in range(3000):
        gam = [rng.randint(1, n) for _ in range(4)]
        S = [rng.randint(2, n) for _ in range(rng.randint(0, 4))]
        # total degree for which the products can be non-zero
        if sum(gam) + sum(S) != (n + 1) * d + n + len(S):
            continue
        assert wdvv_residual(n, d, gam, S) == 0
        checked += 1
        nonzero += _wdvv_side(n, d, *gam, tuple(sorted(S, reverse=True))) != 0
        if checked >= 40:
            break
    assert checked > 0 and nonzero > 0


def test_trade_points():
    for n in (2, 3, 4):
        q = trade_points(n, n + 3, n, [1] * (n + 3), 0)
        assert q == GWQuery(n, n, (n,) * (n + 3))
    q = trade_points(2, 5, 2, [0, 0, 0, 1, 1], 3)
    assert q == GWQuery(2, 2, (2,) * 5) and gw_pn(q) == kontsevich_p2(2)
    with pytest.raises(NotTradeable):
        trade_points(3, 6, 3, [2, 1, 1], 0)
    with pytest.raises(ValueError):
        trade_points(3, 4, 3, [1] * 5, 0)


def test_point_insertions():
    for n in (2, 3, 4, 5):
        assert point_insertions_for_vdim_zero(n, n, [1] * (n + 3)) == 0
        assert point_insertions_for_vdim_zero(n, 1, [0] * (n + 1) + [1, 1]) == 0
        assert point_insertions_for_vdim_zero(n, 1, []) == 2
    assert point_insertions_for_vdim_zero(4, 2, []) is None


def test_symmetry_check_examples():
    r = symmetry_check(3, 6, 3, [1] * 6, 0)
    assert r.beta.computable and r.image.computable
    assert r.beta.value == r.image.value == 1 and r.equal
    assert r.certificate["status"] == "certified"
    r = symmetry_check(2, 8, 3, [1] * 8, 0)
    assert r.fixed and r.equal and r.beta.value == 12
    r = symmetry_check(2, 5, 2, [1, 1], 3)
    assert r.fixed and r.equal
    r = symmetry_check(3, 4, 1, [0] * 4, 2)
    assert r.equal and r.flags  # m = n + 1 is flagged
    r = symmetry_check(2, 5, 2, [2, 0, 0, 1], 0)
    assert not r.beta.computable and r.equal is None


@pytest.mark.parametrize("n,k", [(2, 2), (3, 3), (3, 2), (4, 4), (2, 1)])
def test_self_symmetric_families(n, k):
    # k h - e_1 - ... - e_s is fixed when n k - (n - 1) s == k
    for m in range(n + 1, n + 4):
        for ones in range(0, n + 2):
            a = [1] * ones + [0] * (n + 1 - ones)
            d = k
            if n * d - (n - 1) * ones != d:
                continue
            r = symmetry_check(n, m, d, a, point_insertions_for_vdim_zero(n, d, a) or 0)
            assert r.fixed and r.equal is not False
