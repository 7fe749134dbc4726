from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import symmetric_iets
from ietlab.errors import DomainError, InvalidArgument
from ietlab.iet import (
    Iet,
    Permutation,
    check_keane,
    discontinuities,
    golden_rotation,
    involution,
    make_symmetric_permutation,
    orbit_with_gaps,
    translation_vector,
)

ALPHA = 0.61803398875


@pytest.mark.parametrize("d,mono", [(2, (2, 1)), (3, (3, 2, 1)), (5, (5, 4, 3, 2, 1))])
def test_symmetric_monodromy(d, mono):
    p = make_symmetric_permutation(d)
    assert p.monodromy() == mono
    assert p.is_symmetric() and p.is_irreducible()
    assert [p.pi0(a) for a in range(d)] == list(range(1, d + 1))


@pytest.mark.parametrize("d", [0, 1, -3])
def test_symmetric_rejects_small_d(d):
    with pytest.raises(InvalidArgument):
        make_symmetric_permutation(d)


def test_permutation_rejects_non_bijection():
    with pytest.raises(InvalidArgument):
        Permutation((0, 0, 1), (2, 1, 0))
    with pytest.raises(InvalidArgument):
        Permutation.from_ranks([1, 2, 2], [3, 2, 1])


def test_reducible_permutation():
    p = Permutation((0, 1, 2), (1, 0, 2))
    assert not p.is_irreducible()
    assert not p.is_symmetric()


def test_translation_vector_d2():
    w = translation_vector(make_symmetric_permutation(2), (0.4, 0.6))
    assert w == pytest.approx((0.6, -0.4))


def test_translation_vector_d3_symbolic():
    a, b, c = Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)
    w = translation_vector(make_symmetric_permutation(3), (a, b, c))
    assert w == (b + c, c - a, -a - b)


def test_translation_vector_identity_order_is_zero():
    p = Permutation((0, 1, 2), (0, 1, 2))
    assert translation_vector(p, (0.2, 0.3, 0.5)) == (0, 0, 0)


def test_translation_vector_rejects_nonpositive():
    with pytest.raises(InvalidArgument):
        translation_vector(make_symmetric_permutation(2), (0.0, 1.0))


def test_evaluate_rotation_examples():
    T = Iet(make_symmetric_permutation(2), (1 - ALPHA, ALPHA))
    assert T.evaluate(0.1) == pytest.approx(0.71803398875, abs=1e-15)
    assert T.evaluate(0.5) == pytest.approx(0.11803398875, abs=1e-15)
    assert T.evaluate_inverse(0.71803398875) == pytest.approx(0.1, abs=1e-15)


def test_evaluate_d3_example():
    T = Iet(make_symmetric_permutation(3), (0.3, 0.3, 0.4))
    assert T.letter_at(0.35) == 1
    assert T.evaluate(0.35) == pytest.approx(0.45)
    assert T.evaluate_inverse(0.45) == pytest.approx(0.35)


def test_half_open_convention():
    T = Iet(make_symmetric_permutation(3), (Fraction(3, 10), Fraction(3, 10), Fraction(2, 5)))
    assert T.letter_at(Fraction(3, 10)) == 1  # l_B belongs to I_B
    assert T.letter_at(0) == 0


@pytest.mark.parametrize("x", [-0.1, 1.0, 1.5])
def test_evaluate_domain(x):
    T = golden_rotation()
    with pytest.raises(DomainError):
        T.evaluate(x)
    with pytest.raises(DomainError):
        T.evaluate_inverse(x)


def test_discontinuities_examples():
    ut, ub = discontinuities(Iet(make_symmetric_permutation(2), (0.4, 0.6)))
    assert ut == pytest.approx((0, 0.4, 1)) and ub == pytest.approx((0, 0.6, 1))
    ut, ub = discontinuities(Iet(make_symmetric_permutation(3), (0.3, 0.3, 0.4)))
    assert ut == pytest.approx((0, 0.3, 0.6, 1)) and ub == pytest.approx((0, 0.4, 0.7, 1))


@given(symmetric_iets(exact=True))
def test_discontinuity_images_exact(T):
    ut, ub = discontinuities(T)
    d = T.d
    for k in range(1, d + 1):
        assert T.evaluate(ut[k - 1]) == ub[d - k]


@given(symmetric_iets())
def test_omega_antisymmetric(T):
    om = T.perm.omega()
    assert np.array_equal(om, -om.T)


def test_keane_examples():
    half = Iet(make_symmetric_permutation(2), (0.5, 0.5))
    assert not check_keane(half, 2).ok
    assert check_keane(golden_rotation(), 1000).ok
    v = check_keane(Iet(make_symmetric_permutation(3), (Fraction(3, 10), Fraction(3, 10), Fraction(2, 5))), 10)
    assert not v.ok
    m, a, b, gap = v.witness
    assert 1 <= m <= 10 and gap == 0


def test_keane_witness_within_tolerance():
    T = Iet(make_symmetric_permutation(2), (0.5, 0.5))
    v = check_keane(T, 5)
    assert v.witness[3] <= 1e-12


def test_orbit_with_gaps_examples(golden):
    g = orbit_with_gaps(golden, 0.25, 1)
    assert g.points == [0.25] and g.gaps[0] == pytest.approx(min(0.25, abs(0.25 - golden.lefts[1])))
    pts = orbit_with_gaps(golden, 0.25, 5).points
    expect = [0.25, 0.868, 0.486, 0.104, 0.722]
    assert pts == pytest.approx(expect, abs=1e-3)
    assert orbit_with_gaps(golden, 0.0, 3).gaps[0] == 0.0
    assert 0 in orbit_with_gaps(golden, 0.0, 3).flagged


@pytest.mark.parametrize("a,b,x,y", [(0, 1, 0.3, 0.7), (0, 1, 0.5, 0.5), (0.2, 0.6, 0.25, 0.55)])
def test_involution_examples(a, b, x, y):
    assert involution(a, b, x) == pytest.approx(y)
    assert involution(a, b, involution(a, b, x)) == pytest.approx(x)


def test_involution_domain():
    with pytest.raises(DomainError):
        involution(0, 1, 1.5)


@given(symmetric_iets(), st.floats(0, 1, exclude_max=True))
def test_inverse_round_trip(T, u):
    x = u * T.total
    y = T.evaluate(x)
    back = T.evaluate_inverse(y)
    assert abs(back - x) <= 4 * np.spacing(max(abs(x), T.total))


@given(symmetric_iets(exact=True), st.fractions(0, 1).filter(lambda v: v < 1))
def test_inverse_exact(T, u):
    x = u * T.total
    assert T.evaluate_inverse(T.evaluate(x)) == x


@given(symmetric_iets(), st.integers(0, 30), st.integers(0, 30), st.floats(0, 1, exclude_max=True))
def test_orbit_composition(T, n, m, u):
    x = u * T.total
    assert T.iterate(x, n + m) == T.iterate(T.iterate(x, m), n)


def test_lebesgue_preservation_sampled():
    rng = np.random.default_rng(3)
    for d in range(2, 7):
        e = rng.standard_exponential(d)
        T = Iet(make_symmetric_permutation(d), tuple(e / e.sum()))
        xs = rng.uniform(0, T.total, 10_000)
        ys = T.orbit_array(xs, 2)[1]
        assert ys.min() >= -1e-12 and ys.max() < T.total + 1e-12
        # every interval receives mass proportional to its length
        counts = np.bincount([T.letter_at(min(max(y, 0.0), np.nextafter(T.total, 0))) for y in ys], minlength=d)
        expected = 10_000 * np.array(T.lengths) / T.total
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 30  # p > 0.001 for <= 5 degrees of freedom (critical value 20.5 at d=6)


def test_descriptor_round_trip():
    T = Iet(make_symmetric_permutation(3), (0.25, 0.5, 0.25))
    desc = T.to_descriptor()
    assert desc == {"d": 3, "pi0": [1, 2, 3], "pi1": [3, 2, 1], "lengths": ["0.25", "0.5", "0.25"]}
    assert Iet.from_descriptor(desc) == T
    assert Iet.from_descriptor(desc, "exact").lengths == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def test_normalized_view():
    T = Iet(make_symmetric_permutation(2), (1.0, 3.0))
    assert T.normalized().total == pytest.approx(1.0)


@pytest.mark.parametrize("x", [0.1, 1 / 3, 2.0 ** -60, 12345.678])
def test_to_fraction_exact(x):
    from ietlab.numeric import to_fraction, to_scalar
    assert to_fraction(x) == Fraction(x)
    assert to_fraction(to_scalar(x, "dd")) == Fraction(x)
