"""Hodographic series maps and their inverses.

A p-harmonic function with a critical point of multiplicity ``n`` at the
origin is encoded by coefficients ``A_k`` (``k >= n+1``). In the hodographic
variable ``xi = r e^{i theta}``

    H(xi)       = e^{-i n theta} sum_k r^{lambda_k} (A_k e^{ik theta} + eps_k conj(A_k) e^{-ik theta})
    u_tilde(xi) = 4 sum_k mu_k r^{n + lambda_k} Re(A_k e^{ik theta})

and the function itself is ``u = u_tilde o H^{-1}`` with ``u(0) = 0``. The
leading ``k = n+1`` term of ``H`` is the first-term map (``eval_A``), which is a
global homeomorphism and is inverted here by a monotone angular solve. ``H``
itself is inverted by Newton iteration seeded from that inverse.

All evaluators accept either a :class:`PolarPoint` or complex ``xi`` and are
vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, DomainError, InversionError, OutsideRegionError
from .spectral import ProblemParams, SpectralTriple, spectral_triple

TWO_PI = 2.0 * np.pi
_EPS = np.finfo(float).eps

# angular scan resolution of the first-term inversion
ANGLE_TABLE_POINTS = 4096


@dataclass(frozen=True)
class CoefficientSet:
    """Finite coefficient list ``k -> A_k`` with ``A_{n+1} != 0``.

    Entries are kept sorted by ascending ``k`` so series sums are evaluated in
    a fixed order.
    """

    params: ProblemParams
    coeffs: tuple

    def __post_init__(self):
        items = tuple(sorted(((int(k), complex(a)) for k, a in self.coeffs), key=lambda item: item[0]))
        ks = [k for k, _ in items]
        n = self.params.n
        if len(set(ks)) != len(ks):
            raise DomainError(f"duplicate indices in {ks}")
        if any(k <= n for k in ks):
            raise DomainError(f"all indices must exceed n={n}, got {ks}")
        if not items or items[0][0] != n + 1 or items[0][1] == 0:
            raise DomainError(f"A_{n + 1} must be present and nonzero")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag) for _, a in items):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "coeffs", items)

    @classmethod
    def from_triples(cls, params, triples):
        """Build from ``[(k, re, im), ...]`` as found in config files."""
        return cls(params, tuple((int(k), complex(re, im)) for k, re, im in triples))

    @property
    def leading(self) -> complex:
        return self.coeffs[0][1]

    @property
    def ks(self):
        return np.array([k for k, _ in self.coeffs], dtype=int)

    @property
    def values(self):
        return np.array([a for _, a in self.coeffs], dtype=complex)

    @property
    def weighted_energy(self) -> float:
        return float(sum(k * abs(a) ** 2 for k, a in self.coeffs))

    def triples(self):
        return [[k, a.real, a.imag] for k, a in self.coeffs]


@dataclass(frozen=True)
class PolarPoint:
    """Hodographic point(s) ``r e^{i theta}``; scalars or equal-shape arrays."""

    r: object
    theta: object

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if np.any(r < 0):
            raise DomainError("polar radius must be nonnegative")
        theta = np.mod(np.asarray(self.theta, dtype=float), TWO_PI)
        if r.ndim == 0:
            r, theta = float(r), float(theta)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_complex(cls, xi):
        xi = np.asarray(xi, dtype=complex)
        return cls(np.abs(xi), np.angle(xi))

    @property
    def xi(self):
        return self.r * np.exp(1j * np.asarray(self.theta))


def _polar(xi):
    if isinstance(xi, PolarPoint):
        return np.asarray(xi.r, dtype=float), np.asarray(xi.theta, dtype=float)
    xi = np.asarray(xi, dtype=complex)
    return np.abs(xi), np.angle(xi)


class HodographModel:
    """A coefficient set together with its spectral data and certified radius.

    Treat instances as immutable. ``validity_radius`` is the hodographic
    radius certified by :func:`calibrate_radius` (computed on construction
    unless given); ``z_radius`` is the radius of a z-plane disc about the
    origin that is contained in the image of the certified region.
    """

    def __init__(self, coeffset: CoefficientSet, validity_radius: float | None = None):
        self.coeffset = coeffset
        self.params = coeffset.params
        self.n = self.params.n
        self.p = self.params.p
        self.spectral = [spectral_triple(self.params, k) for k in coeffset.ks]
        self.ks = coeffset.ks.astype(float)
        self.A = coeffset.values
        self.lam = np.array([s.lam for s in self.spectral])
        self.eps = np.array([s.eps for s in self.spectral])
        self.mu = np.array([s.mu for s in self.spectral])

        lead: SpectralTriple = self.spectral[0]
        self.lam1, self.eps1, self.mu1 = lead.lam, lead.eps, lead.mu
        self.A1 = coeffset.leading
        self.phase = float(np.angle(self.A1))
        self.modulus = float(abs(self.A1))
        # A(xi e^{-i phase/(n+1)}) = |A1| e^{i phase n/(n+1)} A_unit(xi)
        self.rotation = self.modulus * np.exp(1j * self.phase * self.n / (self.n + 1))
        self.theta_shift = self.phase / (self.n + 1)

        self._theta_table = np.linspace(0.0, TWO_PI, ANGLE_TABLE_POINTS + 1)
        self._f_table = f_theta(self, self._theta_table)
        if np.any(np.diff(self._f_table) <= 0):
            raise InversionError("angular map of the first term is not monotone")

        if validity_radius is None:
            validity_radius = calibrate_radius(coeffset)
        self.validity_radius = float(validity_radius)
        self.z_radius = np.inf
        if np.isfinite(self.validity_radius):
            theta = np.linspace(0.0, TWO_PI, ANGLE_TABLE_POINTS, endpoint=False)
            boundary = _H(self, np.full_like(theta, self.validity_radius), theta)
            self.z_radius = 0.999 * float(np.abs(boundary).min())

    @property
    def single_term(self) -> bool:
        return len(self.ks) == 1

    def __repr__(self):
        return (
            f"HodographModel(p={self.p}, n={self.n}, coeffs={self.coeffset.triples()}, "
            f"validity_radius={self.validity_radius:.6g})"
        )


def _check_radius(model, r):
    if np.any(r > model.validity_radius * (1.0 + 1e-12)):
        raise OutsideRegionError(
            f"|xi|={float(np.max(r)):.6g} exceeds validity radius {model.validity_radius:.6g}"
        )


# -- series evaluators (no radius checks) -----------------------------------


def _phi(model, theta):
    """Per-term angular factors ``phi_k(theta)``, shape ``theta.shape + (K,)``."""
    e = np.exp(1j * theta[..., None] * model.ks)
    return model.A * e + model.eps * np.conj(model.A) * np.conj(e)


def _H(model, r, theta):
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    powers = r[..., None] ** model.lam
    total = np.sum(powers * _phi(model, theta), axis=-1)
    return np.exp(-1j * model.n * theta) * total


def _H_partials(model, r, theta):
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    rr = r[..., None]
    powers = rr**model.lam
    phi = _phi(model, theta)
    e = np.exp(1j * theta[..., None] * model.ks)
    dphi = 1j * model.ks * (model.A * e - model.eps * np.conj(model.A) * np.conj(e))
    rot = np.exp(-1j * model.n * theta)
    H_r = rot * np.sum(model.lam * rr ** (model.lam - 1.0) * phi, axis=-1)
    H_theta = rot * np.sum(powers * (dphi - 1j * model.n * phi), axis=-1)
    return H_r, H_theta


# -- public evaluators -------------------------------------------------------


def eval_H(model: HodographModel, xi):
    r, theta = _polar(xi)
    _check_radius(model, r)
    return _H(model, r, theta)


def eval_H_partials(model: HodographModel, xi):
    """``(dH/dr, dH/dtheta)`` by term-wise differentiation."""
    r, theta = _polar(xi)
    if np.any(r <= 0):
        raise DomainError("H partials are not defined at xi = 0")
    _check_radius(model, r)
    return _H_partials(model, r, theta)


def jacobian_H(model: HodographModel, xi):
    """Determinant of the real differential of ``H``."""
    r, theta = _polar(xi)
    if np.any(r <= 0):
        raise DomainError("Jacobian of H is not defined at xi = 0")
    _check_radius(model, r)
    H_r, H_theta = _H_partials(model, r, theta)
    return np.imag(np.conj(H_r) * H_theta) / r


def eval_u_tilde(model: HodographModel, xi):
    r, theta = _polar(xi)
    _check_radius(model, r)
    return _u_tilde(model, r, theta)


def _u_tilde(model, r, theta):
    rr = np.asarray(r, dtype=float)[..., None]
    e = np.exp(1j * np.asarray(theta, dtype=float)[..., None] * model.ks)
    return 4.0 * np.sum(model.mu * rr ** (model.n + model.lam) * np.real(model.A * e), axis=-1)


def eval_A(model: HodographModel, xi):
    """First term of ``H``: ``r^lam e^{i theta} (A + eps conj(A) e^{-2i(n+1) theta})``."""
    r, theta = _polar(xi)
    return _A(model, r, theta)


def _A(model, r, theta):
    n = model.n
    bracket = model.A1 + model.eps1 * np.conj(model.A1) * np.exp(-2j * (n + 1) * theta)
    return r**model.lam1 * np.exp(1j * theta) * bracket


def eval_U_tilde(model: HodographModel, xi):
    """First term of ``u_tilde``."""
    r, theta = _polar(xi)
    return _U_tilde(model, r, theta)


def _U_tilde(model, r, theta):
    n = model.n
    return 4.0 * model.mu1 * r ** (n + model.lam1) * np.real(model.A1 * np.exp(1j * (n + 1) * theta))


# angular profiles of the unit-coefficient first term


def m_theta(model: HodographModel, theta):
    c = np.cos(2 * (model.n + 1) * np.asarray(theta, dtype=float))
    e = model.eps1
    return np.sqrt(1.0 + e * e + 2.0 * e * c)


def f_theta(model: HodographModel, theta):
    theta = np.asarray(theta, dtype=float)
    return theta + np.angle(1.0 + model.eps1 * np.exp(-2j * (model.n + 1) * theta))


def j_theta(model: HodographModel, theta):
    n, e = model.n, model.eps1
    c = np.cos(2 * (n + 1) * np.asarray(theta, dtype=float))
    return 1.0 - (2 * n + 1) * e * e - 2 * n * e * c


def jacobian_A(model: HodographModel, xi):
    r, theta = _polar(xi)
    if model.lam1 < 1 and np.any(r <= 0):
        raise DomainError("Jacobian of the first term is singular at 0 when lambda < 1")
    lam = model.lam1
    return model.modulus**2 * lam * r ** (2 * (lam - 1.0)) * j_theta(model, theta + model.theta_shift)


def invert_A(model: HodographModel, w) -> PolarPoint:
    """Exact preimage under the first-term map.

    Works in the frame where ``A_{n+1} = 1``: the argument of ``w`` is matched
    by solving ``f(theta) = t`` (``f`` is strictly increasing from 0 to
    2 pi), then the modulus fixes ``r`` through ``r^lam m(theta) = |w|``.
    """
    w = np.asarray(w, dtype=complex)
    reduced = w / model.rotation
    s = np.abs(reduced)
    t = np.mod(np.angle(reduced), TWO_PI)

    table_t, table_f = model._theta_table, model._f_table
    idx = np.clip(np.searchsorted(table_f, t, side="right") - 1, 0, len(table_t) - 2)
    lo = table_t[idx]
    hi = table_t[idx + 1]
    if np.any(table_f[idx] > t) or np.any(table_f[idx + 1] < t):
        raise InversionError("angular root not bracketed", last_iterate=(lo, hi))
    # 48 halvings take the 2pi/4096 bracket below double resolution
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        below = f_theta(model, mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    theta_red = 0.5 * (lo + hi)
    r = (s / m_theta(model, theta_red)) ** (1.0 / model.lam1)
    theta = np.where(s > 0, theta_red - model.theta_shift, 0.0)
    return PolarPoint(r, theta)


def invert_H(model: HodographModel, z, tol: float = 1e-12, max_iter: int = 50) -> PolarPoint:
    """Solve ``H(xi) = z`` by damped Newton iteration in ``(r, theta)``.

    Seeded from the first-term inverse. Points are iterated until the
    residual stops decreasing or drops to rounding level; the result must
    satisfy ``|H(xi) - z| <= tol |z|``.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    seed = invert_A(model, z)
    r = np.atleast_1d(np.asarray(seed.r, dtype=float)).copy()
    theta = np.atleast_1d(np.asarray(seed.theta, dtype=float)).copy()

    zero = z == 0
    scale = np.abs(z)
    F = np.where(zero, 0.0, _H(model, r, theta) - z)
    res = np.abs(F)
    active = ~zero & (res > 4 * _EPS * scale)
    singular = np.zeros_like(active)

    for _ in range(max_iter):
        if not active.any():
            break
        ia = np.flatnonzero(active)
        ra, ta, Fa = r[ia], theta[ia], F[ia]
        H_r, H_t = _H_partials(model, ra, ta)
        a, b = H_r.real, H_t.real
        c, d = H_r.imag, H_t.imag
        det = a * d - b * c
        bad = np.abs(det) <= 1e-14 * np.abs(H_r) * np.abs(H_t)
        singular[ia[bad]] = True
        det = np.where(bad, 1.0, det)
        dr = -(d * Fa.real - b * Fa.imag) / det
        dt = -(-c * Fa.real + a * Fa.imag) / det

        step = np.ones_like(ra)
        accepted = np.zeros(ra.shape, dtype=bool)
        new_r, new_t, new_F = ra.copy(), ta.copy(), Fa.copy()
        pending = ~bad
        for _halving in range(30):
            if not pending.any():
                break
            trial_r = ra + step * dr
            trial_t = ta + step * dt
            ok_r = trial_r >= 0
            trial_F = _H(model, np.where(ok_r, trial_r, 0.0), trial_t) - z[ia]
            better = pending & ok_r & (np.abs(trial_F) < np.abs(Fa))
            new_r = np.where(better, trial_r, new_r)
            new_t = np.where(better, trial_t, new_t)
            new_F = np.where(better, trial_F, new_F)
            accepted |= better
            pending &= ~better
            step = np.where(pending, 0.5 * step, step)

        r[ia], theta[ia], F[ia] = new_r, new_t, new_F
        res[ia] = np.abs(new_F)
        # stalled points have reached rounding level or need flagging below
        active[ia] = accepted & (res[ia] > 4 * _EPS * scale[ia])

    failed = ~zero & (res > tol * scale)
    if failed.any():
        last = PolarPoint(r.reshape(shape), theta.reshape(shape))
        if np.any(singular & failed):
            raise InversionError("near-singular differential: outside certified region", last)
        raise InversionError(
            f"Newton did not converge for {int(failed.sum())} point(s); "
            f"worst relative residual {float(np.max(res[failed] / scale[failed])):.3g}",
            last,
        )
    r = np.where(zero, 0.0, r)
    _check_radius(model, r)
    return PolarPoint(r.reshape(shape), np.where(zero, 0.0, theta).reshape(shape))


# -- radius certification ----------------------------------------------------


@dataclass(frozen=True)
class RadiusScan:
    r_min: float = 1e-6
    r_max: float = 1.0
    per_decade: int = 64
    angles: int = 512

    def radii(self):
        decades = np.log10(self.r_max / self.r_min)
        count = int(round(decades * self.per_decade)) + 1
        return np.geomspace(self.r_min, self.r_max, count)


def calibrate_radius(coeffset: CoefficientSet, scan: RadiusScan = RadiusScan()) -> float:
    """Largest scanned hodographic radius below which ``H`` is certified.

    Every radius up to the returned one passes two tests: the Jacobian of
    ``H`` is positive on a ring of ``scan.angles`` points, and the tail of the
    series is dominated by the first term,
    ``sum_{k>=n+2} |A_k| r^{lambda_k} <= |A_{n+1}| (1 - |eps_{n+1}|) r^{lambda_{n+1}} / 2``.
    """
    model = HodographModel(coeffset, validity_radius=np.inf)
    radii = scan.radii()
    theta = np.linspace(0.0, TWO_PI, scan.angles, endpoint=False)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    H_r, H_t = _H_partials(model, rr, tt)
    jac_ok = np.all(np.imag(np.conj(H_r) * H_t) / rr > 0, axis=1)

    tail = np.sum(np.abs(model.A[1:]) * radii[:, None] ** model.lam[1:], axis=1)
    head = 0.5 * model.modulus * (1.0 - abs(model.eps1)) * radii**model.lam1
    ok = jac_ok & (tail <= head)
    if not ok[0]:
        raise CalibrationError(f"no certified radius for coefficients {coeffset.triples()}")
    first_bad = np.flatnonzero(~ok)
    return float(radii[-1] if first_bad.size == 0 else radii[first_bad[0] - 1])
