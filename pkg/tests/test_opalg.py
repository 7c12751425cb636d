"""Operator algebra: spec examples plus the exact structural identities."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgeworth.exactmath import q_value
from edgeworth.moments import MomentTable, fixture_table, make_distribution
from edgeworth.opalg import DiffOperator, MultiPoly, a_op, c_coeff, psi_k_op, psi_op, t_op


@pytest.fixture(scope="module")
def exp_table():
    return MomentTable.from_distribution(make_distribution("exponential"), 9)


@pytest.fixture(scope="module", params=[1, 2], ids=["1d", "2d"])
def rational_table(request):
    return fixture_table(request.param, 9)


# --- MultiPoly ----------------------------------------------------------------

def test_poly_diff_and_apply_examples():
    x = MultiPoly.variable(1, 1)
    cube = x * x * x
    d2 = DiffOperator.partial(1, (1, 1))
    assert d2.apply(cube) == 6 * x
    zero = DiffOperator.zero(1)
    assert zero.apply(cube).is_zero()
    quart = cube * x
    third = DiffOperator.partial(1, (1, 1, 1), F(1, 3))
    assert third.apply(quart) == 8 * x


def test_poly_evaluation_vectorized():
    p = MultiPoly(2, {(2, 0): F(1), (0, 1): F(-2), (0, 0): F(5)})
    pts = np.array([[1.0, 2.0], [0.0, 0.0], [-3.0, 1.0]])
    assert np.allclose(p(pts), [1 - 4 + 5, 5, 9 - 2 + 5])


@given(
    st.lists(
        st.tuples(st.integers(0, 4), st.integers(-5, 5)), min_size=0, max_size=6
    ),
    st.lists(
        st.tuples(st.integers(0, 4), st.integers(-5, 5)), min_size=0, max_size=6
    ),
    st.floats(-2, 2),
)
def test_poly_ring_ops_agree_with_pointwise(ta, tb, x):
    pa = MultiPoly(1, {(e,): F(c) for e, c in ta})
    pb = MultiPoly(1, {(e,): F(c) for e, c in tb})
    xs = np.array([x])
    assert (pa + pb)(xs)[0] == pytest.approx(pa(xs)[0] + pb(xs)[0], abs=1e-9)
    assert (pa * pb)(xs)[0] == pytest.approx(pa(xs)[0] * pb(xs)[0], rel=1e-9, abs=1e-9)


# --- compose ------------------------------------------------------------------

def test_compose_examples():
    d1 = DiffOperator.partial(2, (1,))
    d2 = DiffOperator.partial(2, (2,))
    assert d1.compose(d2) == DiffOperator.partial(2, (1, 2))
    a = DiffOperator.partial(1, (1, 1, 1), F(2))
    b = DiffOperator.partial(1, (1, 1, 1), F(3))
    assert a.compose(b) == DiffOperator.partial(1, tuple([1] * 6), F(6))
    assert DiffOperator.zero(1).compose(a).is_zero()


@settings(max_examples=40)
@given(st.data())
def test_apply_after_compose_associates(data):
    dim = 1
    def rand_op():
        terms = {}
        for _ in range(data.draw(st.integers(0, 3))):
            k = tuple([1] * data.draw(st.integers(0, 3)))
            terms[k] = terms.get(k, 0) + F(data.draw(st.integers(-4, 4)))
        return DiffOperator(dim, terms)

    a, b = rand_op(), rand_op()
    fterms = {
        (e,): F(data.draw(st.integers(-4, 4)))
        for e in range(data.draw(st.integers(1, 11)))  # degree up to 10
    }
    f = MultiPoly(dim, fterms)
    assert a.compose(b).apply(f) == a.apply(b.apply(f))


# --- psi operators -------------------------------------------------------------

def test_psi_vanishes_up_to_order_two(exp_table):
    for t in (0, 1, 2):
        assert psi_op(exp_table, t).is_zero()


def test_psi_3_exponential(exp_table):
    # single p = 3 term: (Delta_3 / 3!) d^3 = (1/3) d^3
    assert psi_op(exp_table, 3) == DiffOperator.partial(1, (1, 1, 1), F(1, 3))


def test_psi_4_exponential(exp_table):
    # p = 3 killed by the pairing indicator on odd |beta|; only Delta_4/4! d^4
    d4 = exp_table.delta((1, 1, 1, 1))
    assert psi_op(exp_table, 4) == DiffOperator.partial(1, (1, 1, 1, 1), F(d4, 24))


def test_psi_zero_when_all_deltas_vanish():
    t = MomentTable.from_deltas(1, 9, {})
    for order in range(10):
        assert psi_op(t, order).is_zero()


# --- c coefficients --------------------------------------------------------------

def test_c1_is_scaled_delta_on_short_indices(exp_table):
    assert c_coeff(exp_table, 1, (1, 1, 1)) == F(2, 6)
    assert c_coeff(exp_table, 1, (1, 1)) == 0


def test_c2_exponential_length_six(exp_table):
    assert c_coeff(exp_table, 2, tuple([1] * 6)) == F(1, 9)


def test_c_vanishes_below_triple_order(rational_table):
    for i in (1, 2, 3):
        for length in range(0, 3 * i):
            gamma = tuple([1] * length)
            assert c_coeff(rational_table, i, gamma) == 0


def test_c_closed_forms_low_orders(rational_table):
    # the short-multiindex closed forms: c^1 = Delta/|g|! at lengths 3 and 4,
    # c^2 at length 7 is the two-split Delta_3 Delta_4 combination,
    # c^3 at length 9 is the triple product of Delta_3's over 3!^3
    t = rational_table
    g3 = tuple([1] * 3)
    g4 = (1,) * 4 if t.dim == 1 else (1, 2, 2, 1)
    assert c_coeff(t, 1, g3) == t.delta(g3) / 6
    assert c_coeff(t, 1, g4) == t.delta(g4) / 24
    g7 = (1,) * 7 if t.dim == 1 else (1, 2, 1, 1, 2, 1, 2)
    want7 = (
        t.delta(g7[:3]) * t.delta(g7[3:]) + t.delta(g7[:4]) * t.delta(g7[4:])
    ) / F(144)
    assert c_coeff(t, 2, g7) == want7
    g9 = (1,) * 9 if t.dim == 1 else (1, 2, 1) * 3
    want9 = t.delta(g9[:3]) * t.delta(g9[3:6]) * t.delta(g9[6:]) / F(216)
    assert c_coeff(t, 3, g9) == want9


def test_c1_length_five_closed_form(rational_table):
    # c^1_gamma = Delta_gamma/5! - Delta_{gamma_1..3}/(3! 2!) 1_{g4=g5}
    t = rational_table
    for gamma in [(1, 1, 1, 1, 1), tuple([min(2, t.dim)] * 5)]:
        gamma = tuple(g if g <= t.dim else 1 for g in gamma)
        want = t.delta(gamma) / 120 - t.delta(gamma[:3]) / 12
        assert c_coeff(t, 1, gamma) == want


# --- a operators ------------------------------------------------------------------

def test_a1_equals_psi_both_modes(rational_table):
    for t in range(0, 10):
        assert a_op(rational_table, 1, t, "direct") == psi_op(rational_table, t)
        assert a_op(rational_table, 1, t, "recursive") == psi_op(rational_table, t)


def test_a_vanishes_below_3i(rational_table):
    assert a_op(rational_table, 2, 5, "direct").is_zero()
    assert a_op(rational_table, 3, 8, "recursive").is_zero()


def test_a2_6_exponential_is_psi3_squared(exp_table):
    assert a_op(exp_table, 2, 6, "direct") == DiffOperator.partial(
        1, tuple([1] * 6), F(1, 9)
    )


def test_a_modes_agree(rational_table):
    for i in (1, 2, 3):
        for t in range(0, 10):
            assert a_op(rational_table, i, t, "direct") == a_op(
                rational_table, i, t, "recursive"
            ), (i, t)


# --- psi^(k) -----------------------------------------------------------------------

def test_psi_k_examples(rational_table):
    t = rational_table
    for k in (1, 2, 5):
        assert psi_k_op(t, k, 3) == psi_op(t, 3)
        assert psi_k_op(t, k, 2).is_zero()
    assert psi_k_op(t, 1, 6) == a_op(t, 1, 6, "direct")


def test_psi_k_full_range_convolution_equivalent(rational_table):
    # summing p from 0 adds only zero operators; the truncated form is used
    t = rational_table
    for k in (2, 3):
        for order in range(0, 10):
            full = psi_k_op(t, k - 1, order)
            for p in range(0, order + 1):
                full = full + psi_op(t, p).compose(psi_k_op(t, k - 1, order - p))
            assert full == psi_k_op(t, k, order)


def test_psi_k_collapse_identity(rational_table):
    # psi^(k)_t == sum_i Q_{i-1}(k) A^i_t, exactly
    t = rational_table
    for order in range(0, 10):
        ops = [a_op(t, i, order, "direct") for i in range(1, order // 3 + 1)]
        for k in range(1, 13):
            rhs = DiffOperator.zero(t.dim)
            for i, op in enumerate(ops, start=1):
                rhs = rhs + q_value(i - 1, k) * op
            assert psi_k_op(t, k, order) == rhs, (order, k)


# --- T^n -----------------------------------------------------------------------------

def test_t_op_examples(rational_table):
    t = rational_table
    for n in (1, 4, 9):
        assert t_op(t, n, 3, "direct") == n * psi_op(t, 3)
        for order in (0, 1, 2):
            assert t_op(t, n, order, "direct").is_zero()
    assert t_op(t, 1, 6, "direct") == a_op(t, 1, 6, "direct")  # P_2(1) = 0


def test_t_op_sum_equals_direct(rational_table):
    t = rational_table
    for order in range(0, 10):
        for n in (1, 2, 3, 7, 12):
            assert t_op(t, n, order, "sum") == t_op(t, n, order, "direct"), (order, n)


def test_table_cache_is_thread_safe():
    from concurrent.futures import ThreadPoolExecutor

    table = fixture_table(2, 9)
    with ThreadPoolExecutor(8) as pool:
        res = list(pool.map(lambda k: psi_k_op(table, k, 9), [6] * 32))
    assert all(r == res[0] for r in res)


def test_t_op_float_tables_close(exp_table):
    # float-delta tables run the same machinery; agreement within rounding
    dist = make_distribution("gauss_mixture")
    t = MomentTable.from_distribution(dist, 9)
    for order in (6, 9):
        d = t_op(t, 8, order, "sum").max_coeff_diff(t_op(t, 8, order, "direct"))
        assert d < 1e-10
