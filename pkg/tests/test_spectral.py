import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pamvp.errors import DomainError
from pamvp.spectral import (
    ProblemParams,
    SweepGrid,
    amvp_weights,
    cubic_n1,
    epsilon_margin,
    exponent_ratio,
    exponent_ratio_array,
    lambda_array,
    spectral_sweep,
    spectral_triple,
    triple_arrays,
)

# mpmath, 40 digits
ORACLE_TRIPLES = {
    (3.0, 1, 2): (1.3722813232690143299, 0.08514578448732378005, 0.31385933836549283504),
    (3.0, 1, 3): (2.7720018726587655839, 0.11399906367061720803, 0.40933270911374480535),
    (12.0, 2, 5): (7.3649167310370844259, 0.3038595219703690164, 0.51270166537925831148),
    (1.5, 3, 4): (0.67617497767990627728, -0.042185727040053555843, 0.088087488839953138638),
    (20.0, 1, 2): (2.5299640861416677885, 0.27666799680956785969, 0.45750099760717589476),
    (9.5, 2, 3): (2.0217186218029122637, 0.14550834017051134594, 0.28792361680875945495),
}

ORACLE_RATIOS = {
    (3.0, 1): 2.7487088898602779452,
    (1.5, 1): 3.4774224437384470002,
    (9.52, 1): 2.6419959091603198658,
    (10.0, 1): 2.6452223119824972,
    (12.0, 1): 2.6599606569135548361,
    (20.0, 1): 2.7172353568352585773,
    (3.0, 2): 3.4914757047171241254,
    (12.0, 2): 3.1390965881187308369,
    (1.01, 1): 37.185347915370057023,
    (100.0, 1): 2.9015957528260814854,
}

ps = st.floats(min_value=1.0001, max_value=200.0, allow_nan=False)
ns = st.integers(min_value=1, max_value=50)


@pytest.mark.parametrize("key", sorted(ORACLE_TRIPLES))
def test_triple_matches_high_precision(key):
    p, n, k = key
    t = spectral_triple(ProblemParams(p, n), k)
    lam, eps, mu = ORACLE_TRIPLES[key]
    assert t.k == k
    assert t.lam == pytest.approx(lam, rel=1e-14)
    assert t.eps == pytest.approx(eps, rel=1e-13)
    assert t.mu == pytest.approx(mu, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_linear_case_collapses(n):
    for k in range(n + 1, n + 6):
        t = spectral_triple(ProblemParams(2.0, n), k)
        assert t.lam == pytest.approx(k - n, abs=1e-14)
        assert t.eps == pytest.approx(0.0, abs=1e-15)
        assert t.mu == pytest.approx((k - n) / (2 * k), abs=1e-15)


def test_invalid_parameters_rejected():
    with pytest.raises(DomainError):
        ProblemParams(1.0, 1)
    with pytest.raises(DomainError):
        ProblemParams(0.5, 1)
    with pytest.raises(DomainError):
        ProblemParams(3.0, 0)
    with pytest.raises(DomainError):
        spectral_triple(ProblemParams(3.0, 2), 2)


@pytest.mark.parametrize("key", sorted(ORACLE_RATIOS))
def test_exponent_ratio_matches_high_precision(key):
    p, n = key
    assert exponent_ratio(ProblemParams(p, n)) == pytest.approx(ORACLE_RATIOS[key], rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_exponent_ratio_linear_case(n):
    assert exponent_ratio(ProblemParams(2.0, n)) == pytest.approx(n + 2, rel=1e-15)


def test_exponent_ratio_closed_form_p10():
    lam2 = 0.5 * (math.sqrt(208) - 10)
    lam3 = 0.5 * (math.sqrt(388) - 10)
    assert exponent_ratio(ProblemParams(10.0, 1)) == pytest.approx((1 + lam3) / lam2, rel=1e-14)


def test_cubic_values():
    assert cubic_n1(1.0) == 0.0
    assert cubic_n1(2.0) == 45.0
    assert cubic_n1(1.5) == pytest.approx(18.5, abs=1e-12)


@pytest.mark.parametrize(
    "p, expected",
    [(2.0, (0.0, 1.0)), (6.0, (0.5, 0.5)), (9.52, (7.52 / 11.52, 4.0 / 11.52))],
)
def test_weights(p, expected):
    a, b = amvp_weights(p)
    assert a == pytest.approx(expected[0], abs=1e-15)
    assert b == pytest.approx(expected[1], abs=1e-15)


def test_weights_at_threshold_rounded():
    a, b = amvp_weights(9.52)
    assert round(a, 6) == 0.652778
    assert round(b, 6) == 0.347222


def test_epsilon_margin():
    assert epsilon_margin(ProblemParams(2.0, 1)) == pytest.approx(1 / 3, abs=1e-15)
    assert epsilon_margin(ProblemParams(3.0, 1)) == pytest.approx(1 / 3 - 0.08514578448732378005, rel=1e-14)
    assert epsilon_margin(ProblemParams(100.0, 2)) > 0


def test_array_helpers_agree_with_scalar():
    p, n = 7.25, 3
    k = np.arange(n + 1, n + 10)
    lam, eps, mu = triple_arrays(p, n, k)
    np.testing.assert_array_equal(lam, lambda_array(p, n, k))
    for i, kk in enumerate(k):
        t = spectral_triple(ProblemParams(p, n), int(kk))
        assert (lam[i], eps[i], mu[i]) == pytest.approx((t.lam, t.eps, t.mu), rel=1e-15)
    assert exponent_ratio_array(np.array([p]), n)[0] == pytest.approx(exponent_ratio(ProblemParams(p, n)))


@settings(max_examples=200, deadline=None)
@given(p=ps, n=ns, dk=st.integers(min_value=1, max_value=60))
def test_triple_bounds(p, n, dk):
    k = n + dk
    t = spectral_triple(ProblemParams(p, n), k)
    assert 0 < t.lam < (k * k - n * n) / n
    assert abs(t.eps) < (k - n) / (k + n)
    assert 0 <= t.mu < 1 - n / k


@settings(max_examples=200, deadline=None)
@given(p=ps, n=ns)
def test_ratio_above_two_and_lambda_increasing(p, n):
    params = ProblemParams(p, n)
    assert exponent_ratio(params) > 2
    lam = [spectral_triple(params, k).lam for k in range(n + 1, n + 12)]
    assert all(b > a for a, b in zip(lam, lam[1:]))
    assert abs(spectral_triple(params, n + 1).eps) < 1 / (2 * n + 1)


@settings(max_examples=200, deadline=None)
@given(p=ps)
def test_weights_sum_to_one(p):
    a, b = amvp_weights(p)
    assert a + b == pytest.approx(1.0, abs=4.5e-16)
    assert b > 0
    assert cubic_n1(p) > 0


def test_sweep_default_grid_clean_and_fast():
    t = time.perf_counter()
    sweep = spectral_sweep()
    elapsed = time.perf_counter() - t
    assert sweep["points"] == 200 * 50 * 60
    assert all(v == 0 for v in sweep["violations"].values()), sweep["violations"]
    assert all(m > 0 for m in sweep["margins"].values()), sweep["margins"]
    assert elapsed < 5.0


def test_sweep_custom_grid_shape():
    sweep = spectral_sweep(SweepGrid(p_points=5, n_max=3, k_span=4))
    assert sweep["points"] == 5 * 3 * 4
    assert set(sweep["violations"]) == set(sweep["margins"])
