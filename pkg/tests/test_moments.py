"""Distribution registry, standardization, and moment-table tests."""

import math
from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgeworth.moments import (
    AtomMixture,
    Exponential,
    MomentTable,
    Normal,
    NonInvertibleCovariance,
    OrderExceeded,
    ProductDistribution,
    Uniform,
    cumulants_to_moments,
    delta,
    fixture_table,
    gaussian_moment,
    make_distribution,
    moments_to_cumulants,
    shipped_labels,
    standardize,
)


# --- gaussian moments ---------------------------------------------------------

def test_gaussian_moment_examples():
    assert gaussian_moment((1, 1, 1, 1), 1) == 3          # (t-1)!! for t = 4
    assert gaussian_moment((1, 2), 2) == 0                 # independence + mean 0
    assert gaussian_moment((1, 1, 2, 2), 2) == 1           # product of variances


def test_gaussian_moment_double_factorial_agreement():
    for t in range(0, 12):
        alpha = tuple([1] * t)
        want = 0 if t % 2 else math.prod(range(t - 1, 0, -2)) or 1
        assert gaussian_moment(alpha, 1) == want


def test_gaussian_moment_odd_coordinate_count_vanishes():
    assert gaussian_moment((1, 1, 2), 2) == 0


# --- standardization ----------------------------------------------------------

def test_standardize_uniform_becomes_symmetric():
    s = standardize(Uniform(0, 1))
    root3 = math.sqrt(3)
    xs = np.linspace(-2.5, 2.5, 1001)
    want = np.where(np.abs(xs) <= root3, 1 / (2 * root3), 0.0)
    assert np.max(np.abs(s.pdf(xs) - want)) < 1e-12
    assert s.moment((1,)) == 0 and s.moment((1, 1)) == 1


def test_standardize_normal_unchanged():
    n = Normal()
    s = standardize(n)
    xs = np.linspace(-4, 4, 101)
    assert np.max(np.abs(s.pdf(xs) - n.pdf(xs))) < 1e-12


def test_standardize_exponential_is_centered():
    s = standardize(Exponential(1))
    # law of E - 1: unit variance, support [-1, inf)
    assert s.moment((1,)) == 0
    assert s.moment((1, 1)) == 1
    xs = np.array([-1.5, -0.5, 0.0, 2.0])
    want = np.where(xs >= -1, np.exp(-(xs + 1)), 0.0)
    assert np.max(np.abs(s.pdf(xs) - want)) < 1e-12


def test_standardize_idempotent():
    for name in shipped_labels():
        d = make_distribution(name)
        again = standardize(d)
        xs = np.linspace(-4, 4, 301)
        assert np.max(np.abs(again.pdf(xs) - d.pdf(xs))) < 1e-12, name


def test_standardize_rejects_degenerate():
    with pytest.raises(NonInvertibleCovariance):
        standardize(AtomMixture(p=0))  # pure point mass


# --- moment differences ---------------------------------------------------------

def test_delta_examples():
    ex = make_distribution("exponential")
    assert delta(ex, (1, 1, 1)) == 2  # third central moment of Exp(1)
    uni = make_distribution("uniform")
    assert delta(uni, (1, 1, 1, 1)) == F(-6, 5)  # E U^4 = 9/5, minus 3
    assert delta(ex, (1, 1)) == 0
    assert delta(ex, (1,)) == 0


def test_delta_zero_through_order_three_for_uniform():
    uni = make_distribution("uniform")
    t = MomentTable.from_distribution(uni, 6)
    assert t.sup_delta(3) == 0


@given(st.permutations([1, 1, 1, 2, 2]))
def test_delta_permutation_invariance(perm):
    prod = make_distribution("exponential*uniform")
    assert delta(prod, tuple(perm)) == delta(prod, (1, 1, 1, 2, 2))


def test_order_exceeded():
    ex = make_distribution("exponential")
    with pytest.raises(OrderExceeded):
        ex.moment(tuple([1] * (ex.max_order + 1)))
    t = MomentTable.from_distribution(ex, 5)
    with pytest.raises(OrderExceeded):
        t.delta(tuple([1] * 6))


# --- moment values of shipped laws ---------------------------------------------

def test_exponential_moments_are_derangements():
    s = make_distribution("exponential")
    # central moments of Exp(1): 1, 0, 1, 2, 9, 44, 265, 1854, 14833
    want = [1, 0, 1, 2, 9, 44, 265, 1854, 14833]
    got = [s.moment(tuple([1] * k)) for k in range(len(want))]
    assert got == [F(w) for w in want]


def test_laplace_standardized_moments():
    s = make_distribution("laplace")
    # even moments k! / 2^{k/2}; odd vanish
    for k in range(1, 9):
        want = F(math.factorial(k), 2 ** (k // 2)) if k % 2 == 0 else F(0)
        assert s.moment(tuple([1] * k)) == want


def test_gamma_skewness():
    s = make_distribution("gamma")  # shape 4
    assert s.moment((1, 1, 1)) == F(2, 2)  # 2/sqrt(k) = 1


def test_atom_mixture_moments_and_masses():
    raw = AtomMixture()  # 0.7 N(0,1) + 0.3 delta_2
    assert raw.raw_moment(1) == F(3, 5)
    assert raw.singular_mass == pytest.approx(0.3)
    s = standardize(raw)
    assert abs(float(s.moment((1,)))) < 1e-15
    assert s.moment((1, 1)) == 1
    (loc, mass), = s.atoms
    assert mass == pytest.approx(0.3)


def test_sampling_matches_moments():
    rng = np.random.default_rng(42)
    for name in shipped_labels():
        d = make_distribution(name)
        x = d.sample(rng, 200_000)
        assert abs(x.mean()) < 0.02, name
        assert abs(x.var() - 1) < 0.05, name


# --- products -------------------------------------------------------------------

def test_product_moment_factorizes():
    prod = make_distribution("exponential*uniform")
    assert prod.dim == 2
    ex = make_distribution("exponential")
    uni = make_distribution("uniform")
    assert prod.moment((1, 1, 1, 2, 2)) == ex.moment((1, 1, 1)) * uni.moment((1, 1))


def test_product_pdf_and_char():
    prod = make_distribution("exponential*uniform")
    pt = np.array([[0.3, 0.1]])
    ex, uni = prod.children
    assert prod.pdf(pt)[0] == pytest.approx(float(ex.pdf(0.3) * uni.pdf(0.1)))
    t = np.array([[0.7, -0.2]])
    assert prod.char_fn(t)[0] == pytest.approx(
        complex(ex.char_fn(np.array([0.7]))[0] * uni.char_fn(np.array([-0.2]))[0])
    )


def test_product_requires_ac_factors():
    with pytest.raises(ValueError):
        ProductDistribution([make_distribution("atom_mixture"),
                             make_distribution("uniform")])


# --- registry / parsing -----------------------------------------------------------

def test_registry_parses_parameters():
    d = make_distribution("gamma(shape=9)")
    assert d.moment((1, 1, 1)) == F(2, 3)  # skewness 2/sqrt(9)


def test_registry_unknown_name():
    with pytest.raises(ValueError):
        make_distribution("cauchy")


# --- cumulants --------------------------------------------------------------------

def test_cumulant_round_trip():
    ms = [0.0, 1.0, 2.0, 9.0, 44.0, 265.0]
    back = cumulants_to_moments(moments_to_cumulants(ms))
    assert np.allclose(back, ms)


def test_gaussian_cumulants_vanish():
    ms = [0, 1, 0, 3, 0, 15, 0, 105]
    ks = moments_to_cumulants(ms)
    assert ks[0] == 0 and ks[1] == 1
    assert all(k == 0 for k in ks[2:])


# --- tables ------------------------------------------------------------------------

def test_fixture_table_is_exact_and_symmetric():
    t = fixture_table(2, 7)
    v = t.delta((1, 2, 2))
    assert isinstance(v, F) and v != 0
    for perm in permutations((1, 2, 2)):
        assert t.delta(perm) == v
    assert t.delta((1, 2)) == 0


def test_table_ell_values():
    ex = make_distribution("exponential")
    t = MomentTable.from_distribution(ex, 6)
    assert (t.ell(3), t.ell(4), t.ell(5)) == (2, 9, 44)
    with pytest.raises(ValueError):
        fixture_table(2, 5).ell(3)


def test_table_requires_standardized():
    with pytest.raises(ValueError):
        MomentTable.from_distribution(Exponential(1), 5)


# --- user-supplied densities ---------------------------------------------------------

def test_user_density_quadrature_moments():
    from edgeworth.moments import UserDensity

    tri = lambda x: np.where(
        (x >= 0) & (x <= 2), np.where(x <= 1, x, 2 - x), 0.0
    )
    d = UserDensity(tri, (0, 2), label="triangle", max_order=6)
    assert d.raw_moment(1) == pytest.approx(1.0, abs=1e-11)
    assert d.raw_moment(2) == pytest.approx(7 / 6, abs=1e-11)
    s = standardize(d)
    assert abs(float(s.moment((1,)))) < 1e-9
    assert abs(float(s.moment((1, 1))) - 1.0) < 1e-9
    rng = np.random.default_rng(77)
    x = s.sample(rng, 50_000)
    assert abs(x.mean()) < 0.02 and abs(x.var() - 1) < 0.05
