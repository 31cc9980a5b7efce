"""Discrete p-Dirichlet energy minimization on a square grid.

An independent route to p-harmonic functions: fix boundary values on a
uniform square grid, represent the field by bilinear (Q1) cells, and minimize

    E(u) = sum_cells sum_gauss w h^2 |grad u|^p

over interior nodal values. The minimizer approximates the p-harmonic
extension of the boundary data with O(h^2) nodal error for smooth solutions,
so it can be compared against the series construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DomainError

log = logging.getLogger(__name__)

_G = 0.5 / np.sqrt(3.0)
# relative energy change treated as rounding noise in the line search
ROUNDING_SLACK = 64 * np.finfo(float).eps
_GAUSS = (0.5 - _G, 0.5 + _G)
# how far above the estimated rounding floor a stagnated gradient may sit
STAGNATION_FACTOR = 100.0


@dataclass
class GridProblem:
    """Square ``center +/- half_width`` with ``cells`` bilinear cells per side."""

    center: complex
    half_width: float
    cells: int
    p: float
    boundary_fn: Callable[[np.ndarray], np.ndarray]
    delta: float = 1e-10
    nodes: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.p <= 1:
            raise DomainError(f"p must be > 1, got {self.p}")
        if self.cells < 16:
            raise DomainError("need at least 16 cells per side")
        t = np.linspace(-self.half_width, self.half_width, self.cells + 1)
        # nodes[i, j] = center + x_i + i y_j
        self.nodes = self.center + t[:, None] + 1j * t[None, :]
        self.h = 2.0 * self.half_width / self.cells

    @property
    def boundary_mask(self):
        mask = np.zeros(self.nodes.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    def boundary_values(self):
        grid = np.zeros(self.nodes.shape)
        mask = self.boundary_mask
        grid[mask] = self.boundary_fn(self.nodes[mask])
        return grid


def coons_patch(grid):
    """Transfinite bilinear interpolation of the boundary ring of ``grid``."""
    m = grid.shape[0] - 1
    s = np.linspace(0.0, 1.0, m + 1)[:, None]
    t = np.linspace(0.0, 1.0, m + 1)[None, :]
    left, right = grid[0, :][None, :], grid[-1, :][None, :]
    bottom, top = grid[:, 0][:, None], grid[:, -1][:, None]
    corners = (
        (1 - s) * (1 - t) * grid[0, 0]
        + s * (1 - t) * grid[-1, 0]
        + (1 - s) * t * grid[0, -1]
        + s * t * grid[-1, -1]
    )
    return (1 - s) * left + s * right + (1 - t) * bottom + t * top - corners


def _cell_gradients(u, h):
    """Gradients at the four Gauss points of every cell: list of ``(gx, gy)``."""
    u00, u10 = u[:-1, :-1], u[1:, :-1]
    u01, u11 = u[:-1, 1:], u[1:, 1:]
    out = []
    for s in _GAUSS:
        for t in _GAUSS:
            gx = ((u10 - u00) * (1 - t) + (u11 - u01) * t) / h
            gy = ((u01 - u00) * (1 - s) + (u11 - u10) * s) / h
            out.append((s, t, gx, gy))
    return out


def energy(u, h, p, delta=0.0):
    """Discrete p-Dirichlet energy; ``delta > 0`` gives the regularized functional."""
    total = 0.0
    for _s, _t, gx, gy in _cell_gradients(u, h):
        total += np.sum((gx * gx + gy * gy + delta * delta) ** (p / 2.0))
    return 0.25 * h * h * total


def _gradient_and_hessian(u, h, p, delta, free):
    m = u.shape[0] - 1
    idx = np.arange((m + 1) ** 2).reshape(m + 1, m + 1)
    corners = [idx[:-1, :-1], idx[1:, :-1], idx[:-1, 1:], idx[1:, 1:]]
    grad = np.zeros((m + 1) ** 2)
    mag = np.zeros((m + 1) ** 2)
    rows, cols, data = [], [], []
    wq = 0.25 * h * h
    for s, t, gx, gy in _cell_gradients(u, h):
        bx = np.array([-(1 - t), (1 - t), -t, t]) / h
        by = np.array([-(1 - s), -s, (1 - s), s]) / h
        q = gx * gx + gy * gy + delta * delta
        a = p * q ** ((p - 2.0) / 2.0)
        b = p * (p - 2.0) * q ** ((p - 4.0) / 2.0)
        for i in range(4):
            gi = wq * a * (gx * bx[i] + gy * by[i])
            np.add.at(grad, corners[i].ravel(), gi.ravel())
            np.add.at(mag, corners[i].ravel(), np.abs(gi).ravel())
            for j in range(4):
                # d2W = a I + b g g^T contracted with the shape-function gradients
                bij = bx[i] * bx[j] + by[i] * by[j]
                gbi = gx * bx[i] + gy * by[i]
                gbj = gx * bx[j] + gy * by[j]
                hij = wq * (a * bij + b * gbi * gbj)
                rows.append(corners[i].ravel())
                cols.append(corners[j].ravel())
                data.append(hij.ravel())
    n = (m + 1) ** 2
    H = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    f = free.ravel()
    # gradient entries cannot be resolved below rounding of their summands
    floor = ROUNDING_SLACK * float(np.linalg.norm(mag[f]))
    return grad[f], H[f][:, f], floor


@dataclass
class MinimizeResult:
    solution: np.ndarray
    energy: float
    iterations: int
    grad_norm: float
    history: list


def minimize_energy(problem: GridProblem, tol: float = 1e-10, max_iters: int = 100, initial=None):
    """Minimize the regularized energy over interior nodes.

    Newton directions from the sparse Hessian, Armijo backtracking, stop once
    the gradient norm is below ``tol`` times its initial value (or below the
    rounding floor of its own assembly, whichever is larger). Three
    consecutive steps with flat energy and no gradient progress also end the
    iteration, provided the gradient is within ``STAGNATION_FACTOR`` of the
    floor. ``history``
    records the regularized energy after every accepted step; it never rises
    by more than ``ROUNDING_SLACK`` relative, and only when the step still
    reduces the gradient norm.
    """
    u = problem.boundary_values()
    free = ~problem.boundary_mask
    u = coons_patch(u) if initial is None else np.where(free, initial, u)
    h, p, delta = problem.h, problem.p, problem.delta

    objective = lambda v: energy(v, h, p, delta)  # noqa: E731
    e = objective(u)
    history = [e]
    g, H, floor = _gradient_and_hessian(u, h, p, delta, free)
    g0 = np.linalg.norm(g)
    gnorm = g0
    it = 0
    flat = 0
    while gnorm > max(tol * g0, floor):
        if it >= max_iters:
            raise ConvergenceError(f"energy minimization hit {max_iters} iterations", gnorm)
        d = -spla.spsolve(H.tocsc(), g)
        slope = float(g @ d)
        if slope >= 0:
            d, slope = -g, -float(g @ g)
        step = 1.0
        accepted = False
        while step >= 1e-12:
            trial = u.copy()
            trial[free] += step * d
            e_trial = objective(trial)
            if e_trial <= e + 1e-4 * step * slope:
                accepted = True
                break
            if abs(e_trial - e) <= ROUNDING_SLACK * abs(e):
                # energy is flat at rounding level; fall back to gradient decrease
                g_trial = _gradient_and_hessian(trial, h, p, delta, free)[0]
                if np.linalg.norm(g_trial) < 0.5 * gnorm:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            log.debug("line search stalled at gradient norm %.3e", gnorm)
            break
        previous, e_previous = gnorm, e
        u, e = trial, e_trial
        history.append(e)
        it += 1
        g, H, floor = _gradient_and_hessian(u, h, p, delta, free)
        gnorm = np.linalg.norm(g)
        log.debug("iteration %d: step %.1e gradient %.3e floor %.3e", it, step, gnorm, floor)
        # flat energy and no gradient progress: we are at the noise level of the assembly
        stuck = abs(e - e_previous) <= ROUNDING_SLACK * abs(e) and gnorm >= 0.5 * previous
        flat = flat + 1 if stuck else 0
        if flat >= 3:
            break
    if gnorm > max(tol * g0, STAGNATION_FACTOR * floor if flat >= 3 else floor):
        raise ConvergenceError("energy minimization stalled before reaching tolerance", gnorm)
    return MinimizeResult(u, energy(u, h, p), it, float(gnorm), history)


def continuation_exponents(p: float, step: float = 2.0) -> np.ndarray:
    """Exponents from 2 towards ``p`` in increments of at most ``step``, ending at ``p``."""
    stages = max(1, int(np.ceil(abs(p - 2.0) / step)))
    return np.linspace(2.0, p, stages + 1)[1:]


def solve_p_harmonic(problem: GridProblem, tol: float = 1e-10, max_iters: int = 100):
    """Energy minimizer reached by continuation in the exponent.

    Newton from the Coons patch stalls for large ``p``, where the energy is
    very flat near small gradients. Each stage starts from the previous
    stage's minimizer; the result's ``iterations`` counts all stages.
    """
    u, total = None, 0
    for q in continuation_exponents(problem.p):
        stage = GridProblem(problem.center, problem.half_width, problem.cells, q, problem.boundary_fn, problem.delta)
        res = minimize_energy(stage, tol=tol, max_iters=max_iters, initial=u)
        u, total = res.solution, total + res.iterations
    res.iterations = total
    return res


def compare_fields(solution, problem: GridProblem, field_fn) -> float:
    """Max interior deviation between a grid solution and a reference field."""
    free = ~problem.boundary_mask
    return float(np.max(np.abs(solution[free] - field_fn(problem.nodes[free]))))


def refinement_study(center, half_width, p, boundary_fn, reference_fn=None, cells=(64, 128), tol=1e-10):
    """Solve on successively doubled grids; return per-grid max errors."""
    reference_fn = boundary_fn if reference_fn is None else reference_fn
    errors = []
    for c in cells:
        prob = GridProblem(center, half_width, c, p, boundary_fn)
        res = solve_p_harmonic(prob, tol=tol)
        errors.append(compare_fields(res.solution, prob, reference_fn))
    return np.array(errors)
