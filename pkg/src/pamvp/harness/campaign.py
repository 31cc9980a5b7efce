"""The verification campaign: every check for one coefficient set, in a fixed order.

Each step returns records; a step that raises is turned into a single
failing record and the campaign moves on. Randomness comes from one
generator per step seeded with ``(seed, step index)`` so steps do not
perturb each other's samples.
"""

from __future__ import annotations

import logging

import numpy as np

from .. import inequalities as ineq
from ..amvp import (
    amvp_ladder,
    decay_fit,
    hodographic_su_mu,
    noise_floor,
    radii_ladder,
    su_mu_scale,
)
from ..crosscheck import refinement_study
from ..errors import DomainError
from ..hodograph import TWO_PI, CoefficientSet, HodographModel, eval_A, eval_H, eval_u_tilde, invert_A, invert_H
from ..pharmonic import eval_u, grad_u, residual_refinement, singular_gap
from ..spectral import ProblemParams, amvp_weights, cubic_n1, epsilon_margin, exponent_ratio, spectral_sweep
from .config import CampaignConfig
from .report import Record, VerificationReport, emit_outputs

log = logging.getLogger(__name__)

CHORD_EXPONENTS = (0.5, 1.37, 2.2)
SU_MU_RADII = (0.05, 0.1)
# offset keeps probes off the symmetry directions of simple models
PROBE_OFFSET = 0.3
RING_ANGLES = 64
WRONG_P_SHIFT = 2.0
CONTROL_EXCLUDED_P = (2.0, 6.0)


def critical_alphas(p: float) -> tuple:
    return (0.0, 0.25, 0.5, 0.75, 1.0, amvp_weights(p)[0])


def probe_points(model: HodographModel, ladder) -> np.ndarray:
    angles = PROBE_OFFSET + TWO_PI * np.arange(ladder.probes) / ladder.probes
    return ladder.probe_fraction * model.z_radius * np.exp(1j * angles)


def ladder_radii(model: HodographModel, ladder, center: complex = 0j) -> np.ndarray:
    """Radii for a ladder about ``center``.

    Without an explicit override the first disc stays inside the certified
    region and, for a noncritical centre, away from the origin.
    """
    if ladder.radii is not None:
        return np.asarray(ladder.radii, dtype=float)
    if ladder.r0 is not None:
        return radii_ladder(ladder.r0, ladder.rungs)
    R, d = model.z_radius, abs(center)
    if d >= R:
        raise DomainError(f"centre {center} lies outside the certified disc of radius {R:.6g}")
    r0 = ladder.r0_fraction * R
    if d > 0:
        r0 = min(r0, 0.5 * min(d, R - d))
    return radii_ladder(r0, ladder.rungs)


def _ge(name, anchor, value, threshold, detail=""):
    return Record(name, anchor, bool(value >= threshold), value, threshold, ">=", detail)


def _le(name, anchor, value, threshold, detail=""):
    return Record(name, anchor, bool(value <= threshold), value, threshold, "<=", detail)


# -- steps --------------------------------------------------------------------

_SWEEP_ANCHORS = {
    "lambda_positive": "spectral-bounds",
    "lambda_upper": "spectral-bounds",
    "epsilon_bound": "spectral-bounds",
    "lambda_increasing": "spectral-bounds",
    "growth_constant": "spectral-bounds",
    "mu_nonnegative": "coupling-bounds",
    "mu_upper": "coupling-bounds",
    "epsilon_first": "first-coupling-bound",
    "ratio_above_two": "exponent-ratio",
}


def step_spectral(cfg, model, rng):
    sweep = spectral_sweep()
    out = []
    for key, anchor in _SWEEP_ANCHORS.items():
        bad = sweep["violations"][key]
        out.append(
            Record(
                f"sweep_{key}", anchor, bad == 0, sweep["margins"][key], 0.0, ">",
                f"{bad} violations over {sweep['points']} grid points",
            )
        )
    out.append(_le("cubic_root_at_one", "exponent-ratio", abs(cubic_n1(1.0)), 1e-12))
    out.append(Record("exponent_ratio", "exponent-ratio", exponent_ratio(cfg.params) > 2.0,
                      exponent_ratio(cfg.params), 2.0, ">"))
    out.append(Record("first_coupling_margin", "first-coupling-bound", epsilon_margin(cfg.params) > 0.0,
                      epsilon_margin(cfg.params), 0.0, ">"))
    return out


def step_inequalities(cfg, model, rng):
    tol = cfg.tolerances
    out = []
    chord = ineq.power_chord(rng, cfg.samples)
    out.append(_le("power_chord_max_ratio", "power-chord-inequality", chord.extreme, 1.0,
                   f"{chord.violations} violations in {chord.samples} samples"))
    for lam in sorted(set(CHORD_EXPONENTS + (float(model.lam1),))):
        low = ineq.power_chord_lower(lam, 4.0, rng, cfg.samples)
        out.append(_ge(f"power_chord_lower_lam_{lam:.4f}", "power-chord-lower-bound", low, tol.chord_lower_min))

    R = model.validity_radius
    inj = ineq.first_term_injectivity(model, rng, cfg.samples, radius=R)
    out.append(Record("first_term_injectivity_min_ratio", "first-term-injectivity", inj.violations == 0,
                      inj.extreme, 1.0 - ineq.ROUNDING, ">=",
                      f"{inj.violations} violations in {inj.samples} pairs"))
    cm = ineq.comparable_modulus_ratio(model, rng, cfg.samples, radius=R)
    out.append(_ge("comparable_modulus_min_ratio", "comparable-modulus-injectivity", cm, tol.chord_lower_min))

    for anchor, table in (
        ("leading-term-estimates", ineq.leading_term_estimates(model)),
        ("perturbation-estimates", ineq.perturbation_estimates(model)),
    ):
        for key, ratio in table.items():
            if key == "modulus_ratio":
                continue
            growth = ratio.inner_max / ratio.outer_max if ratio.outer_max > 0 else 0.0
            out.append(_le(f"bounded_{key}", anchor, growth, tol.bounded_growth,
                           f"inner max {ratio.inner_max:.6g}, outer max {ratio.outer_max:.6g}"))

    if cfg.p == 2.0:
        r = R * np.sqrt(rng.uniform(0.0, 1.0, cfg.roundtrip_points))
        xi = r * np.exp(1j * rng.uniform(0.0, TWO_PI, cfg.roundtrip_points))
        poly = sum(a * xi ** (k - model.n) for k, a in model.coeffset.coeffs)
        err = float(np.max(np.abs(eval_H(model, xi) - poly)))
        out.append(_le("linear_case_polynomial", "linear-case-reduction", err, 1e-12))
    return out


def _disc_sample(rng, count, radius):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    return r * np.exp(1j * rng.uniform(0.0, TWO_PI, count))


def step_certificates(cfg, model, rng):
    tol = cfg.tolerances
    out = []
    m = cfg.roundtrip_points
    xi = _disc_sample(rng, m, model.validity_radius)
    back = invert_A(model, eval_A(model, xi)).xi
    out.append(_le("first_term_round_trip", "inversion-round-trip", float(np.max(np.abs(back - xi))), tol.roundtrip))
    back = invert_H(model, eval_H(model, xi)).xi
    out.append(_le("series_round_trip", "inversion-round-trip", float(np.max(np.abs(back - xi))), tol.roundtrip))
    z = _disc_sample(rng, m, model.z_radius)
    forward = eval_H(model, invert_H(model, z))
    out.append(_le("series_round_trip_z", "inversion-round-trip", float(np.max(np.abs(forward - z))), tol.roundtrip))

    xi = _disc_sample(rng, m, model.validity_radius)
    err = float(np.max(np.abs(eval_u(model, eval_H(model, xi)) - eval_u_tilde(model, xi))))
    out.append(_le("pull_back_identity", "pull-back-identity", err, tol.pullback))

    points = np.concatenate([probe_points(model, cfg.ladder) * f for f in (0.5, 1.0)])
    worst = 0.0
    for z0 in points:
        h = 1e-4 * abs(z0)
        gx = (eval_u(model, z0 + h) - eval_u(model, z0 - h)) / (2 * h)
        gy = (eval_u(model, z0 + 1j * h) - eval_u(model, z0 - 1j * h)) / (2 * h)
        ux, uy = grad_u(model, z0)
        worst = max(worst, float(np.hypot(gx - ux, gy - uy) / np.hypot(ux, uy)))
    out.append(_le("gradient_matches_differences", "complex-gradient", worst, tol.gradient,
                   f"{len(points)} points, central differences"))

    slopes, exact, control = [], 0, []
    for z0 in points:
        study = residual_refinement(model, z0)
        if np.all(study.residuals <= 1e-9) and study.residuals[-1] >= 0.5 * study.residuals[0]:
            # finite differences are exact for this field, so there is nothing to decay
            exact += 1
        else:
            slopes.append(study.slope)
        control.append(residual_refinement(model, z0, p=cfg.p + WRONG_P_SHIFT).slope)
    value = min(slopes) if slopes else float("inf")
    out.append(Record("p_laplacian_richardson_slope", "p-laplacian-certificate",
                      value >= tol.richardson_min, None if not slopes else value, tol.richardson_min, ">=",
                      f"{len(points)} points, {exact} with residual at rounding level"))
    out.append(_le("wrong_p_residual_slope", "p-laplacian-certificate", max(control), tol.wrong_p_slope_max,
                   f"operator with p={cfg.p + WRONG_P_SHIFT:g}"))
    return out


def step_su_mu(cfg, model, rng):
    tol = cfg.tolerances
    out = []
    for R in SU_MU_RADII:
        su, mu = hodographic_su_mu(model, R)
        scale = su_mu_scale(model, R)
        out.append(_le(f"extrema_sum_R_{R:g}", "symmetric-extrema", abs(su) / scale, tol.su_mu_rel))
        out.append(_le(f"disc_integral_R_{R:g}", "vanishing-integral", abs(mu) / (scale * np.pi * R * R), tol.su_mu_rel))
    return out


def _ring_max(fn, radii):
    theta = TWO_PI * np.arange(RING_ANGLES) / RING_ANGLES
    return np.array([float(np.max(fn(r * np.exp(1j * theta)))) for r in radii])


def step_singular_gap(cfg, model, rng):
    radii = ladder_radii(model, cfg.ladder)
    gaps = _ring_max(lambda z: singular_gap(model, z), radii)
    scales = _ring_max(lambda z: np.abs(eval_u(model, z)), radii)
    target = exponent_ratio(cfg.params) - cfg.tolerances.singular_gap_margin
    if np.all(gaps <= noise_floor(scales)):
        return [Record("singular_gap_slope", "singular-expansion", True, None, target, ">=",
                       "gap at rounding level on every rung (single-term model)")]
    fit = decay_fit(radii, gaps, scale=scales)
    return [_ge("singular_gap_slope", "singular-expansion", fit.slope, target,
                f"r^2={fit.r_squared:.6f}, {fit.points_used} rungs")]


def _fit_dict(fit):
    if fit is None:
        return None
    return {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
            "points_used": fit.points_used}


def _series(lad):
    return {
        "center": [lad.center.real, lad.center.imag],
        "radii": [float(r) for r in lad.radii],
        "alphas": list(lad.alphas),
        "residuals": [[float(v) for v in row] for row in lad.residuals],
        "scales": [float(s) for s in lad.scales],
        "fits": [_fit_dict(f) for f in lad.fits],
    }


def step_amvp(cfg, model, rng, series):
    tol = cfg.tolerances
    f = lambda z: eval_u(model, z)  # noqa: E731
    radii = ladder_radii(model, cfg.ladder)
    res = cfg.ladder.resolution
    target = exponent_ratio(cfg.params) - tol.critical_slope_margin
    out = []

    lad = amvp_ladder(f, 0.0, radii, critical_alphas(cfg.p), res)
    series["amvp_critical"] = _series(lad)
    for i, (alpha, fit) in enumerate(zip(lad.alphas, lad.fits)):
        # the last weight is the one tied to p; it may coincide with a fixed one
        name = "critical_slope_p_weight" if i == len(lad.alphas) - 1 else f"critical_slope_alpha_{alpha:.4f}"
        if fit is None:
            out.append(Record(name, "critical-point-amvp", True, None, target, ">=",
                              "residual at rounding level on every rung"))
        else:
            out.append(_ge(name, "critical-point-amvp", fit.slope, target, f"r^2={fit.r_squared:.6f}"))

    alpha = amvp_weights(cfg.p)[0]
    control = cfg.p not in CONTROL_EXCLUDED_P
    for j, z0 in enumerate(probe_points(model, cfg.ladder)):
        alphas = (alpha, 1.0 - alpha) if control else (alpha,)
        lad = amvp_ladder(f, z0, ladder_radii(model, cfg.ladder, z0), alphas, res)
        fit = lad.fits[0]
        name = f"probe_{j}_slope"
        if fit is None:
            out.append(Record(name, "noncritical-amvp", True, None, tol.noncritical_slope_min, ">",
                              "residual at rounding level on every rung"))
        else:
            out.append(Record(name, "noncritical-amvp", fit.slope > tol.noncritical_slope_min, fit.slope,
                              tol.noncritical_slope_min, ">", f"r^2={fit.r_squared:.6f}"))
        if control:
            cfit = lad.fits[1]
            if cfit is None:
                # the swapped weights must leave an r^2 term behind
                out.append(Record(f"probe_{j}_swapped_slope", "weight-swap-control", False, None,
                                  tol.control_slope_max, "<=", "swapped residual vanished"))
            else:
                out.append(_le(f"probe_{j}_swapped_slope", "weight-swap-control", cfit.slope,
                               tol.control_slope_max, f"alpha={1.0 - alpha:.4f}"))
    return out


def crosscheck_square(model, cc):
    center = cc.center_fraction * model.z_radius * np.exp(1j * PROBE_OFFSET)
    return center, cc.half_width_fraction * model.z_radius


def _refinement_ratios(errors):
    return [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]


def step_crosscheck(cfg, model, rng):
    cc = cfg.crosscheck
    tol = cfg.tolerances
    center, half = crosscheck_square(model, cc)
    fn = lambda z: eval_u(model, z)  # noqa: E731
    errors = refinement_study(center, half, cfg.p, fn, cells=cc.cells)
    detail = "errors " + ", ".join(f"{c}:{e:.3e}" for c, e in zip(cc.cells, errors))
    out = []
    if errors[-1] <= 1e-9:
        out.append(Record("grid_error_ratio", "energy-minimizer", True, None, tol.crosscheck_ratio, ">=",
                          detail + " (grid solution exact to rounding)"))
    else:
        out.append(_ge("grid_error_ratio", "energy-minimizer", min(_refinement_ratios(errors)),
                       tol.crosscheck_ratio, detail))
    if cc.control:
        other = HodographModel(CoefficientSet(ProblemParams(cfg.p + WRONG_P_SHIFT, cfg.n), model.coeffset.coeffs))
        radius = min(model.z_radius, other.z_radius)
        c2 = cc.center_fraction * radius * np.exp(1j * PROBE_OFFSET)
        h2 = cc.half_width_fraction * radius
        wrong = refinement_study(c2, h2, cfg.p, lambda z: eval_u(other, z), cells=cc.cells)
        ratio = wrong[-1] / wrong[0]
        detail = "errors " + ", ".join(f"{c}:{e:.3e}" for c, e in zip(cc.cells, wrong))
        # a vanishing mismatch would shrink at the discretization rate
        out.append(_ge("mismatched_p_error_retained", "energy-minimizer-control", ratio, 0.5,
                       detail + f", boundary data from p={cfg.p + WRONG_P_SHIFT:g}"))
    return out


STEPS = (
    ("spectral", step_spectral, "spectral-bounds"),
    ("inequalities", step_inequalities, "first-term-injectivity"),
    ("certificates", step_certificates, "pull-back-identity"),
    ("su_mu", step_su_mu, "symmetric-extrema"),
    ("singular_gap", step_singular_gap, "singular-expansion"),
    ("amvp", step_amvp, "critical-point-amvp"),
    ("crosscheck", step_crosscheck, "energy-minimizer"),
)


def run_campaign(config: CampaignConfig, steps=None, emit=True) -> VerificationReport:
    """Run the selected steps (all by default) and collect their records.

    Outputs are written to ``config.output_dir`` when it is set and ``emit``
    is true.
    """
    report = VerificationReport(config=config.to_dict())
    wanted = None if steps is None else set(steps)
    try:
        model = HodographModel(config.coeffset)
    except Exception as exc:
        report.add(Record("model_construction", "inversion-round-trip", False, detail=f"{type(exc).__name__}: {exc}"))
        model = None
    for index, (name, fn, anchor) in enumerate(STEPS):
        if wanted is not None and name not in wanted:
            continue
        if model is None:
            report.add(Record(f"{name}_skipped", anchor, False, detail="no model"))
            continue
        rng = np.random.default_rng([config.seed, index])
        log.info("step %s", name)
        try:
            if name == "amvp":
                records = fn(config, model, rng, report.series)
            else:
                records = fn(config, model, rng)
        except Exception as exc:
            log.warning("step %s failed: %s", name, exc)
            records = [Record(f"{name}_error", anchor, False, detail=f"{type(exc).__name__}: {exc}")]
        for r in records:
            report.add(r)
    if emit and config.output_dir:
        emit_outputs(report, config.output_dir)
    return report
