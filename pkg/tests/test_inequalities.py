import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pamvp import inequalities as ineq
from pamvp.hodograph import CoefficientSet, HodographModel
from pamvp.spectral import ProblemParams


def model(p, n, coeffs):
    return HodographModel(CoefficientSet(ProblemParams(p, n), tuple(coeffs)))


@settings(max_examples=300, deadline=None)
@given(
    rho=st.floats(min_value=1e-3, max_value=1e3),
    t=st.floats(min_value=0.0, max_value=2 * np.pi),
    k=st.integers(min_value=1, max_value=50),
)
def test_power_chord_pointwise(rho, t, k):
    lhs = abs(rho * np.exp(1j * k * t) - 1.0)
    rhs = k * abs(rho * np.exp(1j * t) - 1.0)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_power_chord_sampler_is_deterministic():
    a = ineq.power_chord(np.random.default_rng(5), 2000)
    b = ineq.power_chord(np.random.default_rng(5), 2000)
    assert a == b
    assert a.violations == 0
    assert a.extreme <= 1.0


@pytest.mark.parametrize("lam, floor", [(0.5, 1 / 3), (1.37, 0.9), (2.2, 0.8)])
def test_power_chord_lower_bound(lam, floor):
    low = ineq.power_chord_lower(lam, 4.0, np.random.default_rng(0), 5000)
    assert low >= 1e-6
    assert low >= floor - 1e-12


def test_power_chord_lower_is_one_for_unit_exponent():
    assert ineq.power_chord_lower(1.0, 4.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [2.0, 3.0, 12.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_first_term_injectivity(p, n):
    m = model(p, n, [(n + 1, 0.8 - 0.6j), (n + 2, 0.1)])
    check = ineq.first_term_injectivity(m, np.random.default_rng(11), 5000)
    assert check.violations == 0
    assert check.extreme >= 1 - ineq.ROUNDING


def test_comparable_modulus_ratio_positive():
    m = model(12.0, 2, [(3, 1.0)])
    assert ineq.comparable_modulus_ratio(m, np.random.default_rng(2), 5000) > 0.1


@pytest.mark.parametrize(
    "p, n, coeffs",
    [
        (3.0, 1, [(2, 1.0), (3, 0.1)]),
        (20.0, 1, [(2, 1.0), (3, 0.1), (4, 0.05j)]),
        (1.5, 2, [(3, 1.0), (4, 0.3)]),
    ],
)
def test_estimates_bounded_as_radius_shrinks(p, n, coeffs):
    m = model(p, n, coeffs)
    tables = {**ineq.leading_term_estimates(m), **ineq.perturbation_estimates(m)}
    for name, ratio in tables.items():
        assert ratio.bounded(2.0), name
    assert tables["power_over_H"].inner_max < np.inf
    assert tables["H_over_power"].minimum > 0


def test_single_term_differences_are_exactly_zero():
    m = model(3.0, 1, [(2, 1.0)])
    table = ineq.leading_term_estimates(m)
    assert table["H_minus_first"].outer_max == 0.0
    assert table["u_tilde_minus_first"].outer_max == 0.0
