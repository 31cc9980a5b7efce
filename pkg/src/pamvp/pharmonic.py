"""The p-harmonic function in the z-plane and its first-term comparison function.

``u = u_tilde o H^{-1}`` and ``U = U_tilde o A^{-1}`` where ``A`` and
``U_tilde`` are the leading terms of ``H`` and ``u_tilde``. The complex
gradient satisfies ``du(H(xi)) = xi^n``, which gives the gradient in closed
form once ``xi`` is known.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutsideRegionError
from .hodograph import HodographModel, _U_tilde, _u_tilde, invert_A, invert_H


def eval_u(model: HodographModel, z):
    xi = invert_H(model, z)
    return _u_tilde(model, xi.r, xi.theta)


def grad_u(model: HodographModel, z):
    """``(u_x, u_y) = (2 r^n cos(n theta), -2 r^n sin(n theta))`` at ``xi = H^{-1}(z)``."""
    xi = invert_H(model, z)
    n = model.n
    rn = 2.0 * np.asarray(xi.r) ** n
    return rn * np.cos(n * xi.theta), -rn * np.sin(n * xi.theta)


def eval_U(model: HodographModel, z):
    zeta = invert_A(model, z)
    return _U_tilde(model, zeta.r, zeta.theta)


def singular_gap(model: HodographModel, z):
    return np.abs(eval_u(model, z) - eval_U(model, z))


def plaplacian_residual(model: HodographModel, z, h, p=None, normalized=True):
    """p-Laplacian of ``u`` at ``z`` from a 9-point central-difference stencil.

    Second derivatives come from finite differences of :func:`eval_u`; the
    gradient is the closed form. With ``normalized`` (the default) the value
    is ``(p-2) Delta_inf u / |grad u|^2 + Delta u``, otherwise it is
    multiplied by ``|grad u|^{p-2}``. ``p`` defaults to the model's own
    exponent; pass another value to apply the wrong operator.
    """
    p = model.p if p is None else float(p)
    z = np.asarray(z, dtype=complex)
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape)
    if np.any(h <= 0):
        raise DomainError("finite-difference step must be positive")
    if np.any(np.abs(z) < 4.0 * h):
        raise DomainError("stencil too close to the critical point for this step")
    if np.any(np.abs(z) + np.sqrt(2.0) * h > model.z_radius):
        raise OutsideRegionError("finite-difference stencil leaves the certified region")

    offsets = np.array(
        [0, 1, -1, 1j, -1j, 1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=complex
    )
    pts = z[..., None] + h[..., None] * offsets
    u = eval_u(model, pts)
    c, e, w, nn, s, ne, se, nw, sw = np.moveaxis(u, -1, 0)
    h2 = h * h
    u_xx = (e - 2 * c + w) / h2
    u_yy = (nn - 2 * c + s) / h2
    u_xy = (ne - se - nw + sw) / (4 * h2)

    u_x, u_y = grad_u(model, z)
    g2 = u_x**2 + u_y**2
    inf_lap = u_xx * u_x**2 + 2 * u_xy * u_x * u_y + u_yy * u_y**2
    bracket = (p - 2.0) * inf_lap / g2 + u_xx + u_yy
    if normalized:
        return bracket
    return g2 ** ((p - 2.0) / 2.0) * bracket


@dataclass(frozen=True)
class RefinementStudy:
    steps: np.ndarray
    residuals: np.ndarray
    slope: float


def residual_refinement(model, z, factors=(1e-2, 5e-3, 2.5e-3), p=None) -> RefinementStudy:
    """Residual magnitudes at steps ``h = factor * |z|`` and their log-log slope."""
    steps = np.asarray(factors, dtype=float) * abs(z)
    res = np.abs([plaplacian_residual(model, z, h, p=p) for h in steps])
    with np.errstate(divide="ignore"):
        slope = float(np.polyfit(np.log(steps), np.log(res), 1)[0])
    return RefinementStudy(steps, res, slope)
