"""Sampled checks of the injectivity and size estimates behind the construction.

Each function draws points from a ``numpy.random.Generator`` (or a fixed
grid), evaluates both sides of one inequality, and returns the extreme ratio
together with a violation count. Nothing here asserts; callers decide the
thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hodograph import TWO_PI, HodographModel, _A, _H, _U_tilde, _u_tilde, invert_A

# relative rounding allowance for inequalities that are equalities in exact arithmetic
ROUNDING = 1e-12
# differences below this multiple of eps times the compared values are unresolved
NOISE = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class InequalityCheck:
    samples: int
    violations: int
    extreme: float  # worst ratio lhs/rhs (max for <=, min for >=)


def power_chord(rng, samples: int, k_max: int = 50) -> InequalityCheck:
    """``|rho e^{ikt} - 1| <= k |rho e^{it} - 1|`` for random ``rho``, ``t``, ``k``."""
    rho = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), samples))
    t = rng.uniform(0.0, TWO_PI, samples)
    k = rng.integers(1, k_max + 1, samples)
    lhs = np.abs(rho * np.exp(1j * k * t) - 1.0)
    rhs = k * np.abs(rho * np.exp(1j * t) - 1.0)
    return InequalityCheck(samples, int(np.sum(lhs > rhs)), float(np.max(lhs / rhs)))


def _power_chord_ratio(lam, rho, t):
    num = np.abs(rho**lam * np.exp(1j * t) - 1.0)
    den = rho ** (lam - 1.0) * np.abs(rho * np.exp(1j * t) - 1.0)
    return num / den


def power_chord_lower(lam: float, Lam: float, rng=None, samples: int = 0, grid: int = 400) -> float:
    """Infimum of ``|rho^lam e^{it} - 1| / (rho^{lam-1} |rho e^{it} - 1|)`` on ``1/Lam <= rho <= Lam``.

    Evaluated on a ``grid x grid`` mesh (log-spaced ``rho``) plus optional
    random samples; the removable point ``rho = 1, t = 0`` is excluded.
    """
    rho = np.geomspace(1.0 / Lam, Lam, grid)
    t = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    R, T = np.meshgrid(rho, t, indexing="ij")
    keep = ~((R == 1.0) & (T == 0.0))
    vals = [_power_chord_ratio(lam, R[keep], T[keep])]
    if rng is not None and samples:
        rs = np.exp(rng.uniform(-np.log(Lam), np.log(Lam), samples))
        ts = rng.uniform(0.0, TWO_PI, samples)
        vals.append(_power_chord_ratio(lam, rs, ts))
    return float(np.min(np.concatenate(vals)))


def _random_xi(rng, samples, radius):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, samples))
    return r, rng.uniform(0.0, TWO_PI, samples)


def first_term_injectivity(model: HodographModel, rng, samples: int, radius: float = 1.0) -> InequalityCheck:
    """``|A(xi) - A(zeta)| >= (1 - (2n+1)|eps|) |A_{n+1}| | |xi|^{lam-1} xi - |zeta|^{lam-1} zeta |``.

    Returns the minimum of lhs / rhs; a violation is a ratio below
    ``1 - ROUNDING``.
    """
    r1, t1 = _random_xi(rng, samples, radius)
    r2, t2 = _random_xi(rng, samples, radius)
    lam = model.lam1
    const = (1.0 - (2 * model.n + 1) * abs(model.eps1)) * model.modulus
    lhs = np.abs(_A(model, r1, t1) - _A(model, r2, t2))
    rhs = const * np.abs(r1**lam * np.exp(1j * t1) - r2**lam * np.exp(1j * t2))
    ratio = lhs / rhs
    return InequalityCheck(samples, int(np.sum(ratio < 1.0 - ROUNDING)), float(np.min(ratio)))


def comparable_modulus_ratio(model: HodographModel, rng, samples: int, Lam: float = 4.0, radius: float = 1.0) -> float:
    """Infimum of ``|A(xi) - A(zeta)| / (|xi|^{lam-1} |xi - zeta|)`` over pairs with comparable moduli."""
    r2, t2 = _random_xi(rng, samples, radius)
    r1 = r2 * np.exp(rng.uniform(-np.log(Lam), np.log(Lam), samples))
    t1 = rng.uniform(0.0, TWO_PI, samples)
    xi = r1 * np.exp(1j * t1)
    zeta = r2 * np.exp(1j * t2)
    num = np.abs(_A(model, r1, t1) - _A(model, r2, t2))
    den = r1 ** (model.lam1 - 1.0) * np.abs(xi - zeta)
    return float(np.min(num / den))


def _resolved(diff, scale):
    """Zero out differences that are rounding noise relative to ``scale``."""
    return np.where(diff > NOISE * np.abs(scale), diff, 0.0)


def _potential_size(model, r):
    return 4.0 * model.mu1 * model.modulus * r ** (model.n + model.lam1)


def _ladder(model, decades, angles):
    R = model.validity_radius
    r = np.geomspace(R * 10.0**-decades, R, 16 * decades + 1)
    t = np.linspace(0.0, TWO_PI, angles, endpoint=False)
    return np.meshgrid(r, t, indexing="ij")


@dataclass(frozen=True)
class BoundedRatio:
    """Extremes of a ratio on the inner and outer halves of a radial ladder.

    ``inner_max <= growth * outer_max`` (with ``growth`` chosen by the
    caller) is the operational meaning of the ratio staying bounded as the
    radius shrinks.
    """

    inner_max: float
    outer_max: float
    minimum: float

    def bounded(self, growth: float = 2.0) -> bool:
        return bool(np.isfinite(self.inner_max) and self.inner_max <= growth * max(self.outer_max, 1e-300))


def _split(ratio):
    half = ratio.shape[0] // 2
    return BoundedRatio(float(ratio[:half].max()), float(ratio[half:].max()), float(ratio.min()))


def leading_term_estimates(model: HodographModel, decades: int = 3, angles: int = 64) -> dict:
    """Ratios controlling how far ``H`` and ``u_tilde`` are from their first terms."""
    r, t = _ladder(model, decades, angles)
    n = model.n
    lam1 = model.lam1
    lam2 = model.lam[1] if len(model.lam) > 1 else lam1 + 1.0
    H = _H(model, r, t)
    A = _A(model, r, t)
    ut = _u_tilde(model, r, t)
    Ut = _U_tilde(model, r, t)
    out = {
        "u_tilde_minus_first": _split(_resolved(np.abs(ut - Ut), _potential_size(model, r)) / r ** (n + lam2)),
        "H_minus_first": _split(_resolved(np.abs(H - A), np.abs(A)) / r**lam2),
        "H_over_power": _split(np.abs(H) / r**lam1),
        "power_over_H": _split(r**lam1 / np.abs(H)),
        "A_over_power": _split(np.abs(A) / r**lam1),
        "power_over_A": _split(r**lam1 / np.abs(A)),
    }
    return out


def perturbation_estimates(model: HodographModel, decades: int = 3, angles: int = 64) -> dict:
    """Ratios for ``zeta = A^{-1}(H(xi))`` comparing the first-term potential at ``xi`` and ``zeta``."""
    r, t = _ladder(model, decades, angles)
    n = model.n
    lam2 = model.lam[1] if len(model.lam) > 1 else model.lam1 + 1.0
    z = _H(model, r, t)
    zeta = invert_A(model, z)
    dU = np.abs(_U_tilde(model, r, t) - _U_tilde(model, zeta.r, zeta.theta))
    dU = _resolved(dU, _potential_size(model, r))
    dA = _resolved(np.abs(_A(model, r, t) - z), z)
    with np.errstate(invalid="ignore", divide="ignore"):
        against_first = np.where(dA > 0, dU / (r**n * dA), 0.0)
    modulus = np.abs(zeta.r / r)
    return {
        "potential_vs_first_term": _split(against_first),
        "potential_vs_power": _split(dU / r ** (n + lam2)),
        "modulus_ratio": BoundedRatio(float(modulus.max()), float(modulus.max()), float(modulus.min())),
    }
