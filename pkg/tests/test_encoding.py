import cmath
import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from modulift.atsp_core import AtspInstance, Tour, exact_optimum, random_instance, tour_cost, validate_tour
from modulift.encoding import (
    NormalizerError,
    e_closed_form,
    e_series,
    e_series_tail_bound,
    e_series_terms,
    encode,
    encode_indicator,
    equilibrium_residual,
    equilibrium_residual_exact,
    subtour_bound_check,
    subtour_rhs_expression,
)

# 40-digit value of 2(e^{-2 pi} - 1)
E_AT_I = -1.996265114536584022


def _instance_with_e_ratio():
    return AtspInstance("e", [[0, 10, 50], [40, 0, 20], [30, 60, 0]])


def test_alpha_and_points_in_tour():
    inst = _instance_with_e_ratio()
    enc = encode(inst, Tour((0, 1, 2)), 100)
    arc = next(e for e in enc.arcs if e.arc == (0, 1))
    assert arc.alpha == pytest.approx(math.log(10), rel=1e-15)
    assert arc.s == arc.tau
    assert arc.s.real == 0
    assert arc.s.imag == pytest.approx(math.log(10) / (2 * math.pi), rel=1e-15)


def test_alpha_one_gives_i_over_two_pi():
    arc_cost = Fraction(1)
    r_ref = Fraction(math.e)  # exact binary value of e, cost/r_ref = 1/e to double precision
    inst = AtspInstance("one", [[0, arc_cost, 1], [1, 0, arc_cost], [arc_cost, 1, 0]])
    enc = encode_indicator(inst, Tour((0, 1, 2)), r_ref)
    arc = next(e for e in enc.arcs if e.arc == (0, 1))
    assert abs(arc.alpha - 1) < 1e-15
    assert abs(arc.s - 1j / (2 * math.pi)) < 1e-15


def test_out_of_tour_quarter_shift():
    inst = _instance_with_e_ratio()
    enc = encode(inst, Tour((0, 1, 2)), 100)
    out = next(e for e in enc.arcs if e.arc == (1, 0))
    assert out.x == 0
    assert out.s.real == 0.25
    assert out.tau.real == -0.25
    assert out.cos_theta == 0


def test_t_is_exact_ratio():
    inst = _instance_with_e_ratio()
    enc = encode(inst, Tour((0, 1, 2)), 100)
    assert enc.t == Fraction(100, 60)
    assert enc.objective_sum() == Fraction(60, 100)


def test_normalizer_too_small():
    inst = _instance_with_e_ratio()
    with pytest.raises(NormalizerError, match="normalizer too small"):
        encode(inst, Tour((0, 1, 2)), 30)


def test_invalid_candidate_rejected():
    inst = _instance_with_e_ratio()
    with pytest.raises(ValueError):
        encode(inst, Tour((0, 1)), 100)


def test_e_series_at_i():
    assert abs(e_series(1j, 1j, 40) - E_AT_I) < 1e-12
    assert abs(e_closed_form(1j, 1j) - E_AT_I) < 1e-15


def test_e_series_zero():
    for Q in (1, 5, 60):
        assert e_series(0, 0, Q) == 0


def test_e_series_consecutive_difference():
    s, tau = 0.3 + 0.7j, -0.2 + 0.4j
    diff = e_series(s, tau, 2) - e_series(s, tau, 1)
    expected = (2j * math.pi) ** 2 * (s * s + tau * tau) / 2
    assert abs(diff - expected) < 1e-13
    assert e_series_terms(s, tau, 2)[1] == pytest.approx(expected, abs=1e-13)


def test_e_series_rejects_q_zero():
    with pytest.raises(ValueError):
        e_series(1j, 1j, 0)


_disk = st.tuples(st.floats(-1.4, 1.4), st.floats(-1.4, 1.4)).map(lambda p: complex(*p))


@settings(max_examples=60, deadline=None)
@given(s=_disk, tau=_disk, Q=st.integers(30, 70))
def test_e_series_within_tail_bound(s, tau, Q):
    err = abs(e_series(s, tau, Q) - e_closed_form(s, tau))
    assert err <= e_series_tail_bound(s, tau, Q) + 1e-13


def test_equilibrium_residual_optimal_is_zero():
    inst = random_instance(6, 1, 100, 5)
    opt = exact_optimum(inst)
    enc = encode(inst, opt.optimal_tour, opt.optimal_cost)
    assert equilibrium_residual_exact(enc) == 0
    assert abs(equilibrium_residual(enc, 60)) < 1e-9


def test_equilibrium_residual_matches_closed_form_off_optimum():
    inst = random_instance(5, 1, 100, 42)
    opt = exact_optimum(inst)
    tour = Tour((0, 1, 2, 3, 4))
    enc = encode(inst, tour, opt.optimal_cost)
    t = Fraction(opt.optimal_cost, tour_cost(inst, tour))
    assert equilibrium_residual_exact(enc) == 2 * (1 / t - t)
    assert abs(equilibrium_residual(enc) - float(equilibrium_residual_exact(enc))) < 1e-9


def test_equilibrium_residual_empty_indicator():
    inst = random_instance(4, 1, 10, 2)
    enc = encode_indicator(inst, {}, 100, t=Fraction(1, 2))
    assert equilibrium_residual_exact(enc) == -1
    assert abs(equilibrium_residual(enc) - (-1)) < 1e-10


def test_equilibrium_residual_q_too_small():
    inst = random_instance(4, 1, 10, 2)
    opt = exact_optimum(inst)
    enc = encode(inst, opt.optimal_tour, opt.optimal_cost)
    with pytest.raises(ValueError, match="too small"):
        equilibrium_residual(enc, 5)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 7), seed=st.integers(0, 10_000))
def test_encoding_invariants(n, seed):
    inst = random_instance(n, 1, 50, seed)
    opt = exact_optimum(inst)
    enc = encode(inst, opt.optimal_tour, opt.optimal_cost)
    assert enc.t == 1
    assert len(enc.in_tour) == n
    for e in enc.arcs:
        assert e.s.imag == e.tau.imag
        assert e.s.imag == pytest.approx(-math.log(e.cost / opt.optimal_cost) / (2 * math.pi), rel=1e-12)
        assert e.x == e.cos_theta
        assert e.x == round(math.cos(e.theta))
        assert e.s.real in (0.0, 0.25)


def test_subtour_check_examples():
    inst = random_instance(4, 1, 10, 2)
    single = encode_indicator(inst, {(0, 1): 1}, 100, t=1)
    res = subtour_bound_check(single, {0, 1})
    assert (res.lhs, res.rhs, res.satisfied) == (1.0, 1, True)
    both = encode_indicator(inst, {(0, 1): 1, (1, 0): 1}, 100, t=1)
    res = subtour_bound_check(both, {0, 1})
    assert res.lhs == 2.0 and not res.satisfied


def test_subtour_check_range():
    inst = random_instance(4, 1, 10, 2)
    enc = encode_indicator(inst, {(0, 1): 1}, 100, t=1)
    with pytest.raises(ValueError):
        subtour_bound_check(enc, {0})
    with pytest.raises(ValueError):
        subtour_bound_check(enc, {0, 1, 2, 3})


@pytest.mark.parametrize("n,size,m,k", [(5, 2, 0, 1), (6, 4, 3, 2), (7, 6, -2, 5)])
def test_subtour_rhs_simplifies(n, size, m, k):
    assert abs(subtour_rhs_expression(n, size, m, k) - (size - 1)) < 1e-12


def test_subtour_check_agrees_with_integer_test():
    """Every subset of every 0/1 indicator on a 4-city instance."""
    inst = random_instance(4, 1, 10, 2)
    arcs = inst.arc_list()
    for bits in itertools.product((0, 1), repeat=len(arcs)):
        x = {a: v for a, v in zip(arcs, bits)}
        if not any(bits):
            continue
        enc = encode_indicator(inst, x, 1000, t=1)
        for size in (2, 3):
            for S in itertools.combinations(range(4), size):
                integer = sum(x[(a, b)] for a in S for b in S if a != b) <= size - 1
                assert subtour_bound_check(enc, S).satisfied == integer


def test_subtour_check_matches_validate_on_tours():
    for n in (5, 6, 7):
        inst = random_instance(n, 1, 30, n)
        opt = exact_optimum(inst)
        enc = encode(inst, opt.optimal_tour, opt.optimal_cost)
        assert validate_tour(inst, opt.optimal_tour)
        for size in range(2, n):
            for S in itertools.combinations(range(n), size):
                assert subtour_bound_check(enc, S).satisfied


def test_cos_theta_round_trip_via_cmath():
    for theta, x in ((0.0, 1), (math.pi / 2, 0)):
        assert round((cmath.exp(1j * theta)).real) == x
