"""Disc statistics, mean value residuals and decay-order fits.

``disc_stats`` integrates with Gauss-Legendre nodes in the radial variable
(area weight included) and the trapezoid rule in angle, and locates the
extrema by dense sampling followed by shrinking local grids around the best
cells. ``amvp_residual`` combines the disc midrange and mean with weights
``alpha`` and ``1 - alpha``; ``decay_fit`` reads off the power of ``r`` with
which such residuals vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, FitError
from .hodograph import TWO_PI, HodographModel, _A, j_theta, m_theta

_EPS = np.finfo(float).eps
NOISE_FACTOR = 1e3

ScalarField = Callable[[np.ndarray], np.ndarray]


class DiscEvaluationError(RuntimeError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class DiscStats:
    center: complex
    radius: float
    sup: float
    inf: float
    mean: float

    @property
    def midrange(self):
        return 0.5 * (self.sup + self.inf)

    @property
    def scale(self):
        return max(abs(self.sup), abs(self.inf), abs(self.mean))


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int


def _evaluate(f, pts):
    try:
        return np.asarray(f(pts), dtype=float)
    except Exception as exc:
        # find the first failing point for the report
        for z in np.ravel(pts):
            try:
                f(np.array([z]))
            except Exception:
                raise DiscEvaluationError(f"field evaluation failed at z={complex(z):.6g}: {exc}", z) from exc
        raise DiscEvaluationError(f"field evaluation failed: {exc}") from exc


def _polish(f, center, radius, rho, phi, drho, dphi, sign, coarse_rounds=3, tol=1e-11):
    """Shrink 9x9 polar grids around each candidate until the step is below ``tol``.

    ``sign`` is +1 for the supremum and -1 for the infimum. The first
    ``coarse_rounds`` rounds follow the nominal 4x schedule; later rounds keep
    going with the same factor until the grid has collapsed.
    """
    offsets = np.linspace(-1.0, 1.0, 9)
    best_val = None
    rounds = 0
    while True:
        rr = np.clip(rho[:, None, None] + drho[:, None, None] * offsets[None, :, None], 0.0, radius)
        pp = phi[:, None, None] + dphi[:, None, None] * offsets[None, None, :]
        rr, pp = np.broadcast_arrays(rr, pp)
        vals = sign * _evaluate(f, center + rr * np.exp(1j * pp))
        flat = vals.reshape(len(rho), -1)
        pick = np.argmax(flat, axis=1)
        rows = np.arange(len(rho))
        rho = rr.reshape(len(rho), -1)[rows, pick]
        phi = pp.reshape(len(rho), -1)[rows, pick]
        best_val = flat[rows, pick]
        rounds += 1
        drho = drho / 4.0
        dphi = dphi / 4.0
        if rounds >= coarse_rounds and np.all(dphi < tol) and np.all(drho < tol * radius):
            break
    return sign * float(best_val.max())


def disc_stats(f: ScalarField, center: complex, radius: float, resolution: int = 32) -> DiscStats:
    """Supremum, infimum and mean of ``f`` over the closed disc ``D(center, radius)``.

    ``f`` maps an array of complex points to real values of the same shape.
    """
    if resolution < 16:
        raise DomainError("disc resolution must be at least 16")
    if radius <= 0:
        raise DomainError("disc radius must be positive")
    center = complex(center)
    x, w = leggauss(resolution)
    rho = 0.5 * radius * (x + 1.0)
    w_rho = 0.5 * radius * w * rho
    n_phi = 4 * resolution
    phi = TWO_PI * np.arange(n_phi) / n_phi

    grid_rho = np.concatenate([rho, [radius]])
    pts = center + grid_rho[:, None] * np.exp(1j * phi[None, :])
    vals = _evaluate(f, np.concatenate([pts.ravel(), [center]]))
    at_center = vals[-1]
    vals = vals[:-1].reshape(pts.shape)
    mean = float(np.sum(w_rho * vals[:-1].sum(axis=1)) * (TWO_PI / n_phi) / (np.pi * radius**2))

    rho_all = np.repeat(grid_rho, n_phi)
    phi_all = np.tile(phi, len(grid_rho))
    flat = vals.ravel()
    drho = np.full(4, 2.0 * radius / resolution)
    dphi = np.full(4, 2.0 * TWO_PI / n_phi)
    extremes = []
    for sign in (1.0, -1.0):
        cand = np.argsort(-sign * flat, kind="stable")[:4]
        extremes.append(
            _polish(f, center, radius, rho_all[cand], phi_all[cand], drho, dphi, sign)
        )
    sup = max(extremes[0], float(flat.max()), at_center)
    inf = min(extremes[1], float(flat.min()), at_center)
    return DiscStats(center, float(radius), sup, inf, mean)


def residual_from_stats(stats: DiscStats, value_at_center: float, alpha: float) -> float:
    return alpha * stats.midrange + (1.0 - alpha) * stats.mean - value_at_center


def amvp_residual(f: ScalarField, center, radius, alpha, resolution: int = 32) -> float:
    """``alpha (sup + inf)/2 + (1 - alpha) mean - f(center)`` over ``D(center, radius)``."""
    stats = disc_stats(f, center, radius, resolution)
    value = float(_evaluate(f, np.array([complex(center)]))[0])
    return residual_from_stats(stats, value, alpha)


def noise_floor(scale, factor: float = NOISE_FACTOR):
    return factor * _EPS * np.asarray(scale, dtype=float)


def decay_fit(radii: Sequence[float], values: Sequence[float], scale=None) -> DecayFit:
    """Least-squares line through ``(log r, log value)``.

    Values at or below the noise floor ``1e3 * eps * scale`` are dropped
    before fitting. ``scale`` may be a scalar or one entry per radius and
    defaults to the largest value.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if radii.shape != values.shape:
        raise DomainError("radii and values must have the same length")
    if np.any(radii <= 0) or np.any(np.diff(radii) >= 0):
        raise DomainError("radii must be positive and strictly decreasing")
    if np.any(values < 0):
        raise DomainError("values must be nonnegative")
    if scale is None:
        scale = values.max() if values.size else 0.0
    floor = np.broadcast_to(noise_floor(scale), values.shape)
    usable = np.isfinite(values) & (values > floor)
    if usable.sum() < 3:
        raise FitError(f"only {int(usable.sum())} point(s) above the noise floor")
    x = np.log(radii[usable])
    y = np.log(values[usable])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return DecayFit(float(slope), float(intercept), r2, int(usable.sum()))


def radii_ladder(r0: float, rungs: int = 9) -> np.ndarray:
    return r0 * 0.5 ** np.arange(rungs)


@dataclass
class AmvpLadder:
    """Residuals of one centre over a geometric ladder of radii, for several weights."""

    center: complex
    radii: np.ndarray
    alphas: tuple
    residuals: np.ndarray  # shape (len(alphas), len(radii)), signed
    scales: np.ndarray
    fits: list  # DecayFit or None per alpha

    def fit_for(self, alpha):
        return self.fits[self.alphas.index(alpha)]


def amvp_ladder(f: ScalarField, center, radii, alphas, resolution: int = 32) -> AmvpLadder:
    """Evaluate the residual for every ``alpha`` on every radius and fit each decay.

    A fit is ``None`` when fewer than three rungs clear the noise floor, which
    happens when the residual vanishes identically.
    """
    radii = np.asarray(radii, dtype=float)
    alphas = tuple(float(a) for a in alphas)
    value = float(_evaluate(f, np.array([complex(center)]))[0])
    res = np.empty((len(alphas), len(radii)))
    scales = np.empty(len(radii))
    for j, r in enumerate(radii):
        stats = disc_stats(f, center, r, resolution)
        scales[j] = max(stats.scale, abs(value))
        for i, a in enumerate(alphas):
            res[i, j] = residual_from_stats(stats, value, a)
    fits = []
    for i in range(len(alphas)):
        try:
            fits.append(decay_fit(radii, np.abs(res[i]), scale=scales))
        except FitError:
            fits.append(None)
    return AmvpLadder(complex(center), radii, alphas, res, scales, fits)


# -- exact first-term quantities over the hodographic disc --------------------


def su_mu_scale(model: HodographModel, R: float) -> float:
    """Magnitude of the first-term function on the boundary of ``D(0, R)``."""
    a = model.modulus
    return 4.0 * model.mu1 * a * (R / a) ** ((model.n + model.lam1) / model.lam1)


def hodographic_boundary(model: HodographModel, R: float, theta):
    """Polar radius ``(R / (|A| m(theta)))^{1/lambda}`` of the hodographic disc, reduced frame."""
    return (R / (model.modulus * m_theta(model, theta))) ** (1.0 / model.lam1)


def hodographic_su_mu(model: HodographModel, R: float, resolution: int = 256):
    """``(sup U + inf U, integral of U)`` over ``D(0, R)`` via the hodographic disc.

    Uses only the first term of the model. The supremum and infimum of the
    pulled-back function ``4 mu |A| r^{n+lam} cos((n+1) theta)`` are attained
    on the boundary ``r = r(theta)``; the integral is the polar quadrature
    of the pulled-back integrand against the Jacobian of the first-term map.
    """
    if R <= 0:
        raise DomainError("disc radius must be positive")
    n, lam, mu, a = model.n, model.lam1, model.mu1, model.modulus

    def boundary_value(theta):
        rb = hodographic_boundary(model, R, theta)
        return 4.0 * mu * a * rb ** (n + lam) * np.cos((n + 1) * theta)

    n_theta = 2 * (n + 1) * resolution
    theta = TWO_PI * np.arange(n_theta) / n_theta
    vals = boundary_value(theta)
    extremes = []
    for sign in (1.0, -1.0):
        best = theta[np.argmax(sign * vals)]
        step = TWO_PI / n_theta
        offsets = np.linspace(-1.0, 1.0, 9)
        while step > 1e-13:
            trial = best + step * offsets
            best = trial[np.argmax(sign * boundary_value(trial))]
            step /= 4.0
        extremes.append(float(boundary_value(np.array([best]))[0]))
    sup = max(extremes[0], 0.0)
    inf = min(extremes[1], 0.0)

    x, w = leggauss(resolution)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    rb = hodographic_boundary(model, R, theta)
    # radial integral of r^{n+3lam-1} over [0, r(theta)] with r = r(theta) s
    radial = rb ** (n + 3 * lam) * np.sum(ws * s ** (n + 3 * lam - 1))
    integrand = np.cos((n + 1) * theta) * j_theta(model, theta) * radial
    integral = 4.0 * mu * lam * a**3 * float(np.sum(integrand)) * TWO_PI / n_theta
    return sup + inf, integral


def hodographic_integral(model: HodographModel, R: float, weight, resolution: int = 256):
    """``integral over D(0,R) of weight(z)`` computed in the hodographic plane.

    ``weight`` receives complex z-plane points ``A(zeta)``; the change of
    variables uses the Jacobian of the first-term map. Used to cross-check the
    pulled-back quadrature against direct z-plane integration.
    """
    n, lam = model.n, model.lam1
    x, w = leggauss(resolution)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    n_theta = 2 * (n + 1) * resolution
    theta_red = TWO_PI * np.arange(n_theta) / n_theta
    rb = hodographic_boundary(model, R, theta_red)
    # r = r_b s^{1/lam} turns the area element into a polynomial in s
    r = rb[:, None] * s[None, :] ** (1.0 / lam)
    dr_ds = rb[:, None] * s[None, :] ** (1.0 / lam - 1.0) / lam
    theta = theta_red - model.theta_shift
    zeta_r, zeta_t = np.broadcast_arrays(r, theta[:, None])
    z = _A(model, zeta_r, zeta_t)
    jac = model.modulus**2 * lam * r ** (2 * (lam - 1.0)) * j_theta(model, theta_red)[:, None]
    vals = weight(z) * jac * r * dr_ds
    return float(np.sum(ws[None, :] * vals) * TWO_PI / n_theta)
