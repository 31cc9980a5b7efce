"""Exponents, coupling factors and amplitude factors of the hodographic series.

For growth exponent ``p`` and critical-point multiplicity ``n`` every series
index ``k >= n + 1`` carries

    lambda_k = (sqrt(4 k^2 (p - 1) + n^2 (p - 2)^2) - n p) / 2
    eps_k    = (lambda_k + n - k) / (lambda_k + n + k)
    mu_k     = lambda_k / (lambda_k + n + k)

Everything here is a pure function of its arguments. The ``*_array`` variants
broadcast over numpy arrays and are what the property sweeps use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ProblemParams:
    """Growth exponent ``p > 1`` and critical-point multiplicity ``n >= 1``."""

    p: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p <= 1:
            raise DomainError(f"p must be > 1, got {self.p!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class SpectralTriple:
    k: int
    lam: float
    eps: float
    mu: float


def lambda_array(p, n, k):
    p = np.asarray(p, dtype=float)
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    disc = 4.0 * k**2 * (p - 1.0) + n**2 * (p - 2.0) ** 2
    return 0.5 * (np.sqrt(disc) - n * p)


def triple_arrays(p, n, k):
    """Broadcast ``(lambda, eps, mu)`` over array arguments."""
    lam = lambda_array(p, n, k)
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    denom = lam + n + k
    return lam, (lam + n - k) / denom, lam / denom


def spectral_triple(params: ProblemParams, k: int) -> SpectralTriple:
    if int(k) != k or k <= params.n:
        raise DomainError(f"k must be an integer > n={params.n}, got {k!r}")
    lam, eps, mu = triple_arrays(params.p, params.n, k)
    return SpectralTriple(int(k), float(lam), float(eps), float(mu))


def exponent_ratio(params: ProblemParams) -> float:
    """``(n + lambda_{n+2}) / lambda_{n+1}``, the decay order at the critical point."""
    n = params.n
    lam1 = spectral_triple(params, n + 1).lam
    lam2 = spectral_triple(params, n + 2).lam
    return (n + lam2) / lam1


def exponent_ratio_array(p, n):
    return (n + lambda_array(p, n, n + 2)) / lambda_array(p, n, n + 1)


def cubic_n1(p):
    """Polynomial whose positivity for p > 1 settles the n = 1 ratio bound."""
    return 2.0 * p**3 + 7.0 * p**2 + 10.0 * p - 19.0


def amvp_weights(p: float) -> tuple[float, float]:
    """Weights on the disc midrange and the disc mean."""
    if p <= 1:
        raise DomainError(f"p must be > 1, got {p!r}")
    return (p - 2.0) / (p + 2.0), 4.0 / (p + 2.0)


def epsilon_margin(params: ProblemParams) -> float:
    """Distance of ``|eps_{n+1}|`` below ``1/(2n+1)``."""
    eps = spectral_triple(params, params.n + 1).eps
    return 1.0 / (2 * params.n + 1) - abs(eps)


@dataclass(frozen=True)
class SweepGrid:
    # p - 1 is log-spaced so both p -> 1+ and large p are covered
    p_min: float = 1.0 + 1e-4
    p_max: float = 200.0
    p_points: int = 200
    n_max: int = 50
    k_span: int = 60

    def p_values(self):
        return 1.0 + np.geomspace(self.p_min - 1.0, self.p_max - 1.0, self.p_points)


def spectral_sweep(grid: SweepGrid = SweepGrid()) -> dict:
    """Evaluate every spectral bound on a dense ``(p, n, k)`` grid.

    Returns a dict of violation counts and extreme margins. A margin is the
    smallest slack of the corresponding strict inequality over the grid, so
    positive margins mean the bound held everywhere.
    """
    p = grid.p_values()[:, None, None]
    n = np.arange(1, grid.n_max + 1)[None, :, None]
    k = n + np.arange(1, grid.k_span + 1)[None, None, :]
    lam, eps, mu = triple_arrays(p, n, k)

    lam_upper = (k**2 - n**2) / n
    eps_upper = (k - n) / (k + n)
    mu_upper = 1.0 - n / k
    eps1 = eps[:, :, 0]
    n2 = n[:, :, 0]
    ratio = exponent_ratio_array(p[:, :, 0], n2)
    increments = np.diff(lam, axis=2)

    # growth constant: min_k (lam_k - lam_{n+2}) / (k - (n+2)) over k >= n+3
    growth = (lam[:, :, 2:] - lam[:, :, 1:2]) / (k[:, :, 2:] - (n + 2))

    margins = {
        "lambda_positive": float(lam.min()),
        "lambda_upper": float((lam_upper - lam).min()),
        "epsilon_bound": float((eps_upper - np.abs(eps)).min()),
        "mu_nonnegative": float(mu.min()),
        "mu_upper": float((mu_upper - mu).min()),
        "epsilon_first": float((1.0 / (2 * n2 + 1) - np.abs(eps1)).min()),
        "ratio_above_two": float((ratio - 2.0).min()),
        "lambda_increasing": float(increments.min()),
        "growth_constant": float(growth.min(axis=2).min()),
    }
    violations = {
        "lambda_positive": int((lam <= 0).sum()),
        "lambda_upper": int((lam >= lam_upper).sum()),
        "epsilon_bound": int((np.abs(eps) >= eps_upper).sum()),
        "mu_nonnegative": int((mu < 0).sum()),
        "mu_upper": int((mu >= mu_upper).sum()),
        "epsilon_first": int((np.abs(eps1) >= 1.0 / (2 * n2 + 1)).sum()),
        "ratio_above_two": int((ratio <= 2.0).sum()),
        "lambda_increasing": int((increments <= 0).sum()),
        "growth_constant": int((growth.min(axis=2) <= 0).sum()),
    }
    return {"points": int(lam.size), "margins": margins, "violations": violations}
