import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_symmetric, symmetric_iets
from ietlab.cocycle import (
    LogCocycle,
    birkhoff_sum,
    cancellation_profile,
    cancellation_quality,
    is_odd,
    make_asymmetric_cocycle,
    make_log_cocycle,
    make_odd_cocycle,
)
from ietlab.errors import SingularEvaluation
from ietlab.iet import Iet, golden_rotation, make_symmetric_permutation

D2 = Iet(make_symmetric_permutation(2), (0.4, 0.6))


def test_zero_cocycle_classification():
    phi = make_log_cocycle(D2, (0, 0), (0, 0))
    assert phi.is_symmetric() and not phi.is_nontrivial()
    assert phi.eval(0.3) == 0.0


def test_single_asymmetric_singularity():
    phi = make_log_cocycle(D2, (0, 1), (0, 0))
    assert not phi.is_symmetric() and phi.is_nontrivial()


def test_equal_constants_symmetric():
    T = random_symmetric(0, 4)
    assert make_log_cocycle(T, (1,) * 4, (1,) * 4).is_symmetric()


def test_odd_cocycle_values():
    phi = make_odd_cocycle(D2, (1, 1))
    assert phi.eval(0.1) == pytest.approx(math.log(0.1) - math.log(0.3), rel=1e-14)
    assert phi.eval(0.1) == pytest.approx(-1.0986122886681098)
    assert phi.eval_derivative(0.1) == pytest.approx(1 / 0.1 + 1 / 0.3, rel=1e-14)
    assert phi.eval(0.2) == 0.0 and phi.eval(0.7) == 0.0


def test_odd_cocycle_constants_and_flags():
    T = random_symmetric(1, 5)
    phi = make_odd_cocycle(T, (1,) * 5)
    assert phi.C_minus == tuple(-c for c in phi.C_plus)
    assert phi.is_nontrivial()
    # sum C- = -sum C+: the literal equal-sums predicate does not hold
    assert not phi.is_symmetric()


@given(symmetric_iets(), st.floats(0.001, 0.999), st.data())
def test_odd_reflection_exact(T, u, data):
    c = data.draw(st.lists(st.floats(0.1, 3), min_size=T.d, max_size=T.d))
    phi = make_odd_cocycle(T, c)
    for a in range(T.d):
        x = T.lefts[a] + u * T.lengths[a]
        y = T.lefts[a] + T.rights[a] - x
        assert phi.eval(x) == pytest.approx(-phi.eval(y), abs=1e-12 * max(1, abs(phi.eval(x))))
        assert phi.eval((T.lefts[a] + T.rights[a]) / 2) == 0.0


def test_singular_evaluation_raises():
    phi = make_odd_cocycle(D2, (1, 1))
    with pytest.raises(SingularEvaluation) as info:
        phi.eval(0.4)
    assert info.value.letter == 1 and info.value.side == "left"
    assert math.isnan(phi.eval_array(np.array([0.0]))[0])


def test_wrapping_inert_inside_interval():
    T = random_symmetric(3, 3)
    a = 1
    cp = [0.0, 0.0, 0.0]
    cp[a] = 2.0
    glob = make_log_cocycle(T, cp, (0, 0, 0), form="global")
    xs = T.lefts[a] + np.linspace(0.1, 0.9, 9) * T.lengths[a]
    assert np.allclose(glob.eval_array(xs), 2.0 * np.log(xs - T.lefts[a]), rtol=0, atol=1e-14)


def test_is_odd_verdicts():
    T = random_symmetric(4, 4)
    v = is_odd(make_odd_cocycle(T, (1, 2, 3, 4)))
    assert v.ok and v.consistent and max(v.interval_residual, v.global_residual) < 1e-12
    v = is_odd(make_asymmetric_cocycle(T, (1, 1, 1, 1)))
    assert not v.ok and v.witness is not None and v.consistent
    assert is_odd(make_log_cocycle(T, (0,) * 4, (0,) * 4)).ok


@given(symmetric_iets(d_max=5), st.data())
def test_oddness_equivalence(T, data):
    d = T.d
    kind = data.draw(st.sampled_from(["odd", "random"]))
    if kind == "odd":
        phi = make_odd_cocycle(T, data.draw(st.lists(st.floats(0.1, 2), min_size=d, max_size=d)))
    else:
        cp = data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d))
        cm = data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d))
        phi = make_log_cocycle(T, cp, cm, form="local")
    assert is_odd(phi, T, sample_count=200).consistent


@given(symmetric_iets(d_max=5), st.floats(0.01, 0.99))
def test_derivative_matches_finite_differences(T, u):
    phi = make_log_cocycle(T, [1.0] * T.d, [0.5] * T.d, [(0.3, -0.2)] * T.d)
    x = u * T.total
    a = T.letter_at(x)
    dist = min(x - T.lefts[a], T.rights[a] - x)
    if dist < 1e-6:
        return
    h = 1e-4 * dist
    fd = (phi.eval(x + h) - phi.eval(x - h)) / (2 * h)
    assert fd == pytest.approx(phi.eval_derivative(x), rel=1e-6)


def test_birkhoff_n0():
    r = birkhoff_sum(D2, make_odd_cocycle(D2, (1, 1)), 0.1, 0)
    assert r.value == 0 and not r.clipped and np.all(np.isinf(r.closest_plus))


@pytest.mark.parametrize("n,m", [(10, 7), (1000, 999), (10_000, 3)])
def test_birkhoff_cocycle_identity(n, m):
    T = random_symmetric(5, 4)
    phi = make_odd_cocycle(T, (1, 1, 1, 1))
    x = 0.123456
    whole = birkhoff_sum(T, phi, x, n + m)
    first = birkhoff_sum(T, phi, x, n)
    rest = birkhoff_sum(T, phi, T.iterate(x, n), m)
    assert not (whole.clipped or first.clipped or rest.clipped)
    assert whole.value == pytest.approx(first.value + rest.value, rel=1e-10, abs=1e-10)
    assert whole.min_gap == min(first.min_gap, rest.min_gap)
    assert np.all(whole.closest_plus > 0) and np.all(whole.closest_minus > 0)


def test_birkhoff_clipped_reports_step():
    phi = make_odd_cocycle(D2, (1, 1))
    r = birkhoff_sum(D2, phi, 0.0, 5)
    assert r.clipped and r.clipped_step == 0


def _coboundary(T):
    w = np.array([float(v) for v in T.translation])

    def g(xs, letters):
        y = xs + w[letters]
        val = np.sin(2 * np.pi * xs) - np.sin(2 * np.pi * y)
        der = 2 * np.pi * (np.cos(2 * np.pi * xs) - np.cos(2 * np.pi * y))
        return val, der

    return LogCocycle(T, (0.0,) * T.d, (0.0,) * T.d, None, g)


def test_coboundary_sums_bounded():
    T = random_symmetric(6, 3)
    phi = _coboundary(T)
    for x in (0.1, 0.5, 0.77):
        for n in (1, 10, 100, 5000):
            assert abs(birkhoff_sum(T, phi, x, n).value) <= 2 + 1e-9


def test_cancellation_smooth_bounded_by_sup_derivative():
    T = random_symmetric(7, 3)
    phi = _coboundary(T)
    sup = 4 * np.pi
    for r in (1, 10, 500):
        assert cancellation_quality(T, phi, 0.3, r).M_hat <= sup


def test_cancellation_r1_finite():
    T = random_symmetric(8, 3)
    phi = make_odd_cocycle(T, (1, 1, 1))
    res = cancellation_quality(T, phi, 0.37, 1)
    assert math.isfinite(res.M_hat) and not res.clipped


def test_cancellation_profile_covers_single_evaluations():
    T = random_symmetric(9, 3)
    phi = make_odd_cocycle(T, (1, 1, 1))
    prof = cancellation_profile(T, phi, [0.21], 200)
    single = max(cancellation_quality(T, phi, 0.21, r).M_hat for r in (1, 50, 200))
    assert prof >= single - 1e-9


def test_golden_cancellation_recorded():
    T = golden_rotation()
    phi = make_odd_cocycle(T, (1, 1))
    vals = [cancellation_quality(T, phi, 0.3, r).M_hat for r in (34, 89, 233, 610)]
    assert all(math.isfinite(v) for v in vals)


def test_descriptor_round_trip():
    T = random_symmetric(10, 3)
    phi = make_log_cocycle(T, (1, 0, 2), (0.5, 0, 0), [(1.0, 0.5), (0.0,), (2.0,)])
    back = LogCocycle.from_descriptor(T, phi.to_descriptor())
    assert back == phi
    xs = np.linspace(0.01, 0.99, 7) * T.total
    assert np.array_equal(back.eval_array(xs), phi.eval_array(xs))
