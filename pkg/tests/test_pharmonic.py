import numpy as np
import pytest

from pamvp.amvp import decay_fit
from pamvp.errors import DomainError, OutsideRegionError
from pamvp.hodograph import CoefficientSet, HodographModel, eval_H, eval_u_tilde
from pamvp.pharmonic import (
    eval_U,
    eval_u,
    grad_u,
    plaplacian_residual,
    residual_refinement,
    singular_gap,
)
from pamvp.spectral import ProblemParams, exponent_ratio


def model(p, n, coeffs):
    return HodographModel(CoefficientSet(ProblemParams(p, n), tuple(coeffs)))


@pytest.fixture(scope="module")
def identity():
    return model(2.0, 1, [(2, 1.0)])


@pytest.fixture(scope="module")
def single3():
    return model(3.0, 1, [(2, 1.0)])


@pytest.fixture(scope="module")
def multi3():
    return model(3.0, 1, [(2, 0.8 - 0.6j), (3, 0.1 + 0.05j)])


def test_identity_is_real_part_of_square(identity):
    z = np.array([0.3 + 0.2j, -0.1 + 0.45j, 0.05j])
    np.testing.assert_allclose(eval_u(identity, z), np.real(z**2), atol=1e-15)
    np.testing.assert_allclose(eval_U(identity, z), np.real(z**2), atol=1e-15)
    ux, uy = grad_u(identity, z)
    np.testing.assert_allclose(ux, 2 * z.real, atol=1e-15)
    np.testing.assert_allclose(uy, -2 * z.imag, atol=1e-15)


def test_origin_is_a_critical_zero(multi3):
    assert eval_u(multi3, 0.0) == 0.0
    assert eval_U(multi3, 0.0) == 0.0
    ux, uy = grad_u(multi3, 0.0)
    assert (ux, uy) == (0.0, 0.0)


def test_value_and_gradient_against_high_precision(multi3):
    z = 0.1 * np.exp(0.4j)
    assert eval_u(multi3, z) == pytest.approx(0.0026635911464017144566, rel=1e-13)
    ux, uy = grad_u(multi3, z)
    assert ux == pytest.approx(0.19827134133347311647, rel=1e-13)
    assert uy == pytest.approx(-0.34717256744318813294, rel=1e-13)


@pytest.mark.parametrize("fixture", ["single3", "multi3"])
def test_pull_back_identity(fixture, request):
    m = request.getfixturevalue(fixture)
    rng = np.random.default_rng(3)
    xi = m.validity_radius * np.sqrt(rng.uniform(size=500)) * np.exp(2j * np.pi * rng.uniform(size=500))
    err = np.abs(eval_u(m, eval_H(m, xi)) - eval_u_tilde(m, xi))
    assert err.max() < 1e-9


@pytest.mark.parametrize("fixture", ["single3", "multi3"])
def test_gradient_matches_differences(fixture, request):
    m = request.getfixturevalue(fixture)
    for z in 0.3 * m.z_radius * np.exp(1j * np.array([0.2, 1.9, 4.0])):
        h = 1e-5 * abs(z)
        gx = (eval_u(m, z + h) - eval_u(m, z - h)) / (2 * h)
        gy = (eval_u(m, z + 1j * h) - eval_u(m, z - 1j * h)) / (2 * h)
        ux, uy = grad_u(m, z)
        assert np.hypot(gx - ux, gy - uy) < 1e-7 * np.hypot(ux, uy)


def test_single_term_equals_first_term_function(single3):
    z = 0.4 * np.exp(1j * np.linspace(0, 6, 13))
    np.testing.assert_allclose(eval_U(single3, z), eval_u(single3, z), atol=1e-15)
    assert np.max(singular_gap(single3, z)) < 1e-15


def test_identity_residual_vanishes_for_own_exponent(identity):
    z = 0.3 * np.exp(1j * np.array([0.1, 0.9, 2.5]))
    assert np.max(np.abs(plaplacian_residual(identity, z, 1e-2 * 0.3))) < 1e-9


def test_identity_residual_under_other_exponent(identity):
    # bracket = (p-2) 8(x^2 - y^2) / (4|z|^2) = 2 (p-2) cos(2 theta) for u = Re z^2
    theta = np.array([0.0, np.pi / 4, 0.6])
    z = 0.3 * np.exp(1j * theta)
    res = plaplacian_residual(identity, z, 3e-3, p=4.0)
    np.testing.assert_allclose(res, 4.0 * np.cos(2 * theta), atol=1e-8)
    unnormalized = plaplacian_residual(identity, z, 3e-3, p=4.0, normalized=False)
    np.testing.assert_allclose(unnormalized, res * (4 * 0.09), atol=1e-9)


@pytest.mark.parametrize("fixture", ["single3", "multi3"])
def test_residual_decays_quadratically(fixture, request):
    m = request.getfixturevalue(fixture)
    study = residual_refinement(m, 0.4 * m.z_radius * np.exp(0.7j))
    assert study.slope >= 1.8
    assert np.all(np.diff(study.residuals) < 0)


def test_wrong_exponent_residual_does_not_decay(single3):
    z = 0.4 * np.exp(0.7j)
    right = residual_refinement(single3, z)
    wrong = residual_refinement(single3, z, p=5.0)
    assert abs(wrong.slope) < 0.1
    assert wrong.residuals.min() > 1e3 * right.residuals.max()


def test_residual_stencil_guards(single3):
    with pytest.raises(DomainError):
        plaplacian_residual(single3, 0.01, 0.01)
    with pytest.raises(DomainError):
        plaplacian_residual(single3, 0.3, 0.0)
    with pytest.raises(OutsideRegionError):
        plaplacian_residual(single3, 0.99 * single3.z_radius, 0.01)


def _gap_slope(m):
    radii = 0.3 * m.z_radius * 0.5 ** np.arange(9)
    theta = 2 * np.pi * np.arange(64) / 64
    gaps = [singular_gap(m, r * np.exp(1j * theta)).max() for r in radii]
    return decay_fit(radii, gaps).slope


@pytest.mark.parametrize(
    "p, coeffs, target",
    [
        (2.0, [(2, 1.0), (3, 0.1)], 3.0),
        (3.0, [(2, 1.0), (3, 0.05)], 2.748708889860278),
    ],
)
def test_singular_gap_decays_at_exponent_ratio(p, coeffs, target):
    m = model(p, 1, coeffs)
    assert exponent_ratio(m.params) == pytest.approx(target, rel=1e-14)
    assert _gap_slope(m) >= target - 0.1
