from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_symmetric
from ietlab.errors import InvalidArgument, StructuralError
from ietlab.iet import Iet, golden_rotation, make_symmetric_permutation
from ietlab.pipeline import sample_tau
from ietlab.rauzy import induce, scan_good_times
from ietlab.towers import (
    audit_tower,
    build_F,
    build_Xi,
    check_partial_rigidity,
    intersection_measure,
    measure_lower_bound,
    normalize_union,
    pairwise_disjoint,
    symmetric_difference_measure,
    union_measure,
)

ETA = 1 / 2000
DELTA = 0.5 / 40


def sample(seed, d=4):
    T = random_symmetric(seed, d)
    tau, _ = sample_tau(T.perm, np.random.default_rng(seed), 100_000)
    return T, tau


def exact_sample(seed, d=4):
    T, tau = sample(seed, d)
    return Iet(T.perm, tuple(Fraction(v) for v in T.lengths)), tau


intervals = st.lists(st.tuples(st.integers(0, 50), st.integers(1, 10)).map(
    lambda t: (Fraction(t[0]), Fraction(t[0] + t[1]))), max_size=8)


@given(intervals)
def test_normalize_union_disjoint_same_measure(A):
    N = normalize_union(A)
    assert pairwise_disjoint(N)
    assert union_measure(N) == union_measure(A)
    assert intersection_measure(A, A) == union_measure(A)


@given(intervals, intervals)
def test_symmetric_difference_identities(A, B):
    sd = symmetric_difference_measure(A, B)
    assert sd == symmetric_difference_measure(B, A) >= 0
    assert sd == union_measure(A + B) - intersection_measure(A, B)


def test_build_F_ratio_exact():
    T, tau = exact_sample(27)
    st_ = induce(T, 3, tau)
    for a in (1, 2, 3):
        lo, hi = build_F(st_, a, Fraction(1, 8))
        lam = st_.lengths[a]
        assert (hi - lo) / lam == Fraction(5, 8)
        assert lo - st_.induced().lefts[a] == lam / 8
    lo, hi = build_F(st_, 1, Fraction(249, 1000))
    assert (hi - lo) / st_.lengths[1] > Fraction(1, 2)


def test_build_F_rejects_bad_arguments():
    T, tau = sample(27)
    st_ = induce(T, 3, tau)
    for eta in (0, 0.25, -0.1):
        with pytest.raises(InvalidArgument):
            build_F(st_, 1, eta)
    with pytest.raises(InvalidArgument):
        build_F(st_, 0, 0.1)


def test_floor_count_and_measure_exact():
    T, tau = exact_sample(27)
    st_ = induce(T, 3, tau)
    Xi = build_Xi(T, st_, 2, Fraction(1, 2000))
    q = st_.q[2]
    assert len(Xi.floors) == -(-q // 4) + 1
    assert Xi.measure == len(Xi.floors) * Xi.length
    assert union_measure(Xi.intervals()) == Xi.measure
    assert Xi.h == q + st_.q[Xi.alpha_bar]


@pytest.mark.parametrize("seed,n", [(27, 3), (11, 10), (12, 10)])
def test_tower_claims_at_good_times(seed, n):
    T, tau = exact_sample(seed)
    st_ = induce(T, n, tau)
    for a in (1, 3):
        Xi = build_Xi(T, st_, a, Fraction(1, 2000))
        rep = audit_tower(Xi, T, st_, Fraction(1, 80))
        assert rep.floors_disjoint and rep.floors_in_continuity
        assert rep.base_ratio > Fraction(1, 2) and rep.length_bound
        assert rep.gaps_ok and rep.exceptional_ok and rep.structure_ok
        assert rep.claims_ok
        assert rep.sym_diff <= 2 * Xi.length


def test_exceptional_pairs_last_letter():
    T, tau = exact_sample(27)
    st_ = induce(T, 3, tau)
    a = T.perm.top[-1]
    Xi = build_Xi(T, st_, a, Fraction(1, 2000))
    rep = audit_tower(Xi, T, st_, Fraction(1, 80))
    q = st_.q[a]
    assert rep.exceptional_pairs == [(q - 1, a), (q, T.perm.bar(a))]
    target = Fraction(1, 2000) * st_.lengths[a]
    assert all(g == target for g in rep.exceptional_gaps)


def test_float_audit_matches_exact_verdict():
    T, tau = sample(11)
    st_ = induce(T, 10, tau)
    rep = audit_tower(build_Xi(T, st_, 1, ETA), T, st_, DELTA)
    assert rep.claims_ok
    d = rep.to_dict()
    assert d["claims_ok"] and all(g < 10 * d["gap_threshold"] for _, _, g in d["min_gap_table"])


def test_towers_disjoint_over_scanned_good_times():
    T, tau = sample(1)
    scan = scan_good_times(T, tau, 10, DELTA, 40, q_cap=600)
    found = 0
    for rec in scan.good_times():
        st_ = induce(T, rec.n, tau)
        for a in rec.good_letters():
            Xi = build_Xi(T, st_, a, ETA)
            assert pairwise_disjoint(Xi.intervals())
            assert Xi.length * Xi.h <= T.total
            found += 1
    assert found > 0


def test_golden_towers():
    T = golden_rotation()
    tau = (1.0, -1.0)
    scan = scan_good_times(T, tau, 3, 0.02, 20)
    times = scan.good_times(1)
    assert times
    for rec in times:
        st_ = induce(T, rec.n, tau)
        rep = audit_tower(build_Xi(T, st_, 1, 0.1), T, st_, 0.02)
        assert rep.claims_ok


def test_golden_step_zero_floor_crosses():
    T = golden_rotation()
    with pytest.raises(StructuralError):
        build_Xi(T, induce(T, 0), 1, 0.1)


def test_partial_rigidity_inconclusive_single_report():
    T, tau = sample(27)
    st_ = induce(T, 3, tau)
    rep = audit_tower(build_Xi(T, st_, 1, ETA), T, st_, DELTA)
    assert check_partial_rigidity([rep]).verdict == "inconclusive"


def test_measure_lower_bound_at_balanced_times():
    T, tau = sample(27)
    scan = scan_good_times(T, tau, 10, DELTA, 40, q_cap=600)
    for rec in scan.good_times():
        st_ = induce(T, rec.n, tau)
        for a in rec.good_letters():
            Xi = build_Xi(T, st_, a, ETA)
            assert Xi.measure >= measure_lower_bound(ETA, 10, T.d, T.total)
