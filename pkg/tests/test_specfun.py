import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsm_imaging.errors import DomainError, SingularityError
from dsm_imaging.specfun import (
    SeriesBudget,
    asymptotic_hankel1_0,
    bessel_j,
    bessel_j_table,
    bessel_y0,
    bessel_y1,
    effective_order,
    hankel1_0,
    hankel1_1,
    jacobi_anger,
    jacobi_anger_tail_bound,
)

mpmath.mp.dps = 40


def j0_power_series(x):
    """sum (-x^2/4)^k / (k!)^2 in 40-digit arithmetic."""
    x = mpmath.mpf(x)
    total, term, k = mpmath.mpf(0), mpmath.mpf(1), 0
    while abs(term) > mpmath.mpf(10) ** -35:
        total += term
        k += 1
        term *= -(x * x) / 4 / (k * k)
    return float(total)


def mp_hankel1_0(z):
    return complex(mpmath.hankel1(0, mpmath.mpc(z.real, z.imag)))


# --- bessel_j -------------------------------------------------------------


def test_bessel_j_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0
    assert bessel_j(-3, 0.0) == 0.0


def test_bessel_j0_at_one_matches_power_series():
    expected = j0_power_series(1.0)
    assert expected == pytest.approx(0.76519768655796655, abs=1e-16)
    assert abs(bessel_j(0, 1.0) - expected) <= 1e-12


@pytest.mark.parametrize("s", [0, 1, 2, 7, 30, 120, 200])
@pytest.mark.parametrize("x", [1e-6, 0.3, 2.5, 17.0, 199.0, 201.5, 987.6, 1e4])
def test_bessel_j_against_mpmath(s, x):
    assert abs(bessel_j(s, x) - float(mpmath.besselj(s, x))) <= 1e-12


def test_bessel_j_vectorised_matches_scalar():
    x = np.linspace(0.0, 60.0, 41)
    vec = bessel_j(5, x)
    assert np.array_equal(vec, np.array([bessel_j(5, v) for v in x])) or np.allclose(vec, [bessel_j(5, v) for v in x], atol=1e-14)


@pytest.mark.parametrize("s", [1, 2, 3, 10, 51, 200])
def test_negative_order_is_exact_sign_flip(s):
    for x in (0.5, 12.0, 300.0):
        assert bessel_j(-s, x) == (-1) ** s * bessel_j(s, x)


@pytest.mark.parametrize(
    "s, x",
    [(201, 1.0), (-201, 1.0), (0, -1e-3), (0, 1.0001e4), (0, math.inf), (0, math.nan), (1.5, 1.0)],
)
def test_bessel_j_outside_envelope(s, x):
    with pytest.raises(DomainError):
        bessel_j(s, x)


def test_table_survives_tiny_arguments_and_many_orders():
    tab = bessel_j_table(300, np.array([1e-8, 0.0, 250.0]))
    assert np.all(np.isfinite(tab))
    assert tab[0, 1] == 1.0 and np.all(tab[1:, 1] == 0.0)
    assert tab[1, 0] == pytest.approx(5e-9, rel=1e-12)
    assert abs(tab[120, 2] - float(mpmath.besselj(120, 250))) < 1e-13


@settings(max_examples=300, deadline=None)
@given(s=st.integers(-50, 50), x=st.floats(0.1, 100.0))
def test_three_term_recurrence(s, x):
    lhs = bessel_j(s - 1, x) + bessel_j(s + 1, x)
    assert abs(lhs - 2 * s / x * bessel_j(s, x)) <= 1e-9


# --- Y0, Y1, H0 -----------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(x=st.floats(0.1, 100.0))
def test_wronskian(x):
    j0, j1 = bessel_j(0, x), bessel_j(1, x)
    y0, y1 = bessel_y0(x), bessel_y1(x)
    # J0 Y0' - J0' Y0 with J0' = -J1, Y0' = -Y1
    assert abs(-j0 * y1 + j1 * y0 - 2 / (math.pi * x)) <= 1e-9


def test_y_against_mpmath():
    for x in (0.1, 0.9, 5.0, 12.99, 13.0, 40.0, 99.0):
        assert abs(bessel_y0(x) - float(mpmath.bessely(0, x))) < 1e-10
        assert abs(bessel_y1(x) - float(mpmath.bessely(1, x))) < 1e-10


def test_hankel_at_one():
    expected = mp_hankel1_0(1 + 0j)
    assert expected.real == pytest.approx(0.76519769, abs=1e-8)
    assert expected.imag == pytest.approx(0.08825696, abs=1e-8)
    assert abs(hankel1_0(1.0) - expected) <= 1e-10


def test_hankel_zero_is_singular():
    with pytest.raises(SingularityError):
        hankel1_0(0.0)
    with pytest.raises(SingularityError):
        hankel1_0(np.array([1.0, 0.0]))


def test_hankel_rejects_left_half_plane():
    with pytest.raises(DomainError):
        hankel1_0(-1.0 + 0.5j)


def test_hankel_complex_arguments_against_mpmath():
    rng = np.random.default_rng(7)
    z = np.concatenate(
        [
            rng.uniform(0, 25, 60) + 1j * rng.uniform(0, 25, 60),
            rng.uniform(0, 1e4, 30) + 1j * rng.uniform(0, 300, 30),
            np.array([12.999, 13.0, 13j, 12.99j, 9.19 + 9.19j, 1e4, 1e-4]),
        ]
    )
    got = hankel1_0(z)
    for zi, gi in zip(z, got):
        assert abs(gi - mp_hankel1_0(complex(zi))) <= 1e-10, zi
    for zi in z[:20]:
        ref = complex(mpmath.hankel1(1, mpmath.mpc(zi.real, zi.imag)))
        assert abs(hankel1_1(zi) - ref) <= 1e-10


def test_hankel_large_real_argument_matches_asymptotic():
    # at x = 1e3 the leading far-field term sqrt(2/(pi x)) e^{i(x - pi/4)}
    # differs by O(x^{-3/2}) from the exact value
    x = 1.0e3
    lead = cmath.sqrt(2 / (math.pi * x)) * cmath.exp(1j * (x - math.pi / 4))
    assert abs(hankel1_0(x) - lead) < 1.0 / x**1.5


def test_hankel_large_real_argument_matches_far_field_term():
    # r = 0 and |a| = R make k|r - a| = x; the far-field term carries an
    # extra factor i/4, removed here
    x, k = 1.0e3, 171.27
    R = x / k
    far = asymptotic_hankel1_0(k, np.zeros(2), np.array([R, 0.0]), R) / 0.25j
    assert abs(hankel1_0(x) - far) * math.sqrt(x) < 1e-3


# --- far-field term as written --------------------------------------------


def test_asymptotic_value_when_projection_vanishes():
    k = 171.27 + 4.26j
    a = np.array([0.0, -0.09])
    r = np.array([0.02, 0.0])  # theta . r = 0
    expected = (1 + 1j) * cmath.exp(1j * k * 0.09) / (4 * cmath.sqrt(k * math.pi * 0.09))
    assert asymptotic_hankel1_0(k, r, a, 0.09) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("angle", [0.0, 1.0, 4.0])
def test_asymptotic_at_origin_ignores_direction(angle):
    k = 50.0
    a = 0.3 * np.array([math.cos(angle), math.sin(angle)])
    expected = (1 + 1j) * cmath.exp(1j * k * 0.3) / (4 * math.sqrt(k * math.pi * 0.3))
    assert asymptotic_hankel1_0(k, np.zeros(2), a, 0.3) == pytest.approx(expected, rel=1e-14)


def test_asymptotic_radius_must_be_positive():
    with pytest.raises(DomainError):
        asymptotic_hankel1_0(10.0, np.zeros(2), np.array([1.0, 0.0]), 0.0)


@pytest.mark.parametrize("k", [171.27, 171.27 + 4.26j])
def test_asymptotic_converges_as_radius_grows(k):
    # The term as written equals i/4 times the true leading term, so the
    # ratio to H0 tends to i/4; the distance to that limit must shrink.
    r = np.array([0.004, -0.003])
    theta = np.array([math.cos(0.7), math.sin(0.7)])
    devs = []
    for R in (0.09, 0.9, 9.0):
        a = R * theta
        exact = hankel1_0(k * np.hypot(*(r - a)))
        ratio = asymptotic_hankel1_0(k, r, a, R) / exact
        devs.append(abs(ratio - 0.25j) / 0.25)
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-3


# --- Jacobi-Anger -----------------------------------------------------------


def test_jacobi_anger_at_zero_argument():
    assert jacobi_anger(0.0, 1.234, SeriesBudget(5)) == 1.0


def test_jacobi_anger_theta_zero_is_plain_exponential():
    assert abs(jacobi_anger(1.0, 0.0, SeriesBudget(20)) - complex(math.cos(1), math.sin(1))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(x=st.floats(0.0, 50.0), theta=st.floats(-math.pi, math.pi))
def test_jacobi_anger_matches_exponential(x, theta):
    budget = SeriesBudget(math.ceil(x) + 30, 1e-12)
    assert abs(jacobi_anger(x, theta, budget) - cmath.exp(1j * x * math.cos(theta))) <= 1e-10


def _truncation_errors(x, theta, orders):
    exact = cmath.exp(1j * x * math.cos(theta))
    return [abs(jacobi_anger(x, theta, SeriesBudget(s, 1e-300)) - exact) for s in orders]


@pytest.mark.xfail(
    strict=True,
    reason="partial sums oscillate: at x = 23.7 the error grows from order 27 to 28",
)
def test_truncation_error_non_increasing_beyond_argument():
    errs = _truncation_errors(23.7, 0.4, range(24, 60))
    assert all(b <= a or b < 1e-13 for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("x", [0.5, 7.3, 23.7, 49.9])
def test_tail_bound_non_increasing_and_dominates_error(x):
    orders = range(math.ceil(x), math.ceil(x) + 40)
    bounds = [jacobi_anger_tail_bound(x, s) for s in orders]
    assert all(b <= a for a, b in zip(bounds, bounds[1:]))
    for theta in (0.0, 0.4, 2.5):
        for s, b, e in zip(orders, bounds, _truncation_errors(x, theta, orders)):
            assert e <= b + 1e-12, s


def test_truncation_error_converges():
    # default budget ceil(x) + 30 = 54 is well past the round-off floor
    errs = _truncation_errors(23.7, 0.4, range(24, 60))
    assert max(errs[30:]) < 1e-13


def test_effective_order_is_capped_and_adaptive():
    assert effective_order(10.0, SeriesBudget(5)) == 5
    small = effective_order(10.0, SeriesBudget(100, 1e-12))
    assert 10 < small < 100


def test_budget_validation():
    with pytest.raises(DomainError):
        SeriesBudget(-1)
    with pytest.raises(DomainError):
        SeriesBudget(3, 0.0)
    assert SeriesBudget.for_argument(12.2).s_max == 43
