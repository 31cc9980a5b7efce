"""Command-line entry point: ``pamvp {coeffs,verify,amvp,crosscheck,report}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .amvp import amvp_ladder
from .crosscheck import refinement_study
from .errors import CalibrationError, ConfigError, DomainError
from .harness.campaign import crosscheck_square, critical_alphas, ladder_radii, run_campaign
from .harness.config import CampaignConfig, default_config, parse_coeff
from .harness.report import VerificationReport, emit_outputs
from .hodograph import HodographModel
from .pharmonic import eval_u
from .spectral import amvp_weights, exponent_ratio, spectral_triple

log = logging.getLogger("pamvp")


def _config(args) -> CampaignConfig:
    base = CampaignConfig.load(args.config) if args.config else None
    coeffs = [parse_coeff(c) for c in args.coeff] if args.coeff else None
    if base is None:
        p = 3.0 if args.p is None else args.p
        n = 1 if args.n is None else args.n
        base = default_config(p, n)
    return base.with_overrides(p=args.p, n=args.n, coefficients=coeffs, seed=args.seed, output_dir=args.out)


def _model(cfg):
    return HodographModel(cfg.coeffset)


def cmd_coeffs(args):
    cfg = _config(args)
    params = cfg.params
    kmax = args.kmax if args.kmax is not None else params.n + 8
    print(f"p = {params.p:g}, n = {params.n}")
    print(f"{'k':>4} {'lambda_k':>22} {'eps_k':>22} {'mu_k':>22}")
    for k in range(params.n + 1, kmax + 1):
        t = spectral_triple(params, k)
        print(f"{k:>4} {t.lam:>22.16g} {t.eps:>22.16g} {t.mu:>22.16g}")
    a, b = amvp_weights(params.p)
    print(f"exponent ratio  {exponent_ratio(params):.16g}")
    print(f"weights         midrange {a:.16g}, mean {b:.16g}")
    return 0


def cmd_verify(args):
    cfg = _config(args)
    if cfg.output_dir is None:
        cfg = cfg.with_overrides(output_dir="pamvp-out")
    report = run_campaign(cfg)
    width = max(len(r.name) for r in report.records) if report.records else 10
    for r in report.records:
        value = "-" if r.value is None else f"{r.value:.6g}"
        threshold = "" if r.threshold is None else f"{r.relation} {r.threshold:.6g}"
        print(f"{r.status.upper():4} {r.name:<{width}} {value:>14} {threshold:<16} {r.detail}")
    print(f"overall: {report.status} ({len(report.failures())} failed of {len(report.records)})")
    print(f"outputs in {cfg.output_dir}")
    return 0 if report.passed else 1


def _parse_point(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def cmd_amvp(args):
    cfg = _config(args)
    model = _model(cfg)
    center = args.point
    alphas = tuple(args.alpha) if args.alpha else critical_alphas(cfg.p)
    radii = ladder_radii(model, cfg.ladder, center)
    lad = amvp_ladder(lambda z: eval_u(model, z), center, radii, alphas, cfg.ladder.resolution)
    tol = cfg.tolerances
    critical = center == 0
    target = exponent_ratio(cfg.params) - tol.critical_slope_margin if critical else tol.noncritical_slope_min
    weight = amvp_weights(cfg.p)[0]
    print(f"center {center}, target slope {target:.6g}")
    print("r".rjust(12) + "".join(f"{'alpha=' + format(a, '.4f'):>16}" for a in alphas))
    for j, r in enumerate(radii):
        print(f"{r:12.4e}" + "".join(f"{lad.residuals[i, j]:16.6e}" for i in range(len(alphas))))
    ok = True
    for a, fit in zip(alphas, lad.fits):
        # away from the critical point only the weights tied to p must beat r^2
        judged = critical or np.isclose(a, weight)
        if fit is None:
            print(f"alpha={a:.4f}: residual at rounding level")
            continue
        good = fit.slope >= target if critical else fit.slope > target
        print(f"alpha={a:.4f}: slope {fit.slope:.6f} (r^2 {fit.r_squared:.6f})" + ("" if judged else " [not judged]"))
        ok &= good or not judged
    return 0 if ok else 1


def cmd_crosscheck(args):
    cfg = _config(args)
    model = _model(cfg)
    cells = tuple(args.cells) if args.cells else cfg.crosscheck.cells
    center, half = crosscheck_square(model, cfg.crosscheck)
    errors = refinement_study(center, half, cfg.p, lambda z: eval_u(model, z), cells=cells)
    print(f"square centre {center:.6g}, half width {half:.6g}, p = {cfg.p:g}")
    for c, e in zip(cells, errors):
        print(f"{c:5d} cells  max error {e:.6e}")
    if errors[-1] <= 1e-9:
        print("grid solution exact to rounding")
        return 0
    ratios = errors[:-1] / errors[1:]
    for c, r in zip(cells[1:], ratios):
        print(f"ratio at {c} cells: {r:.4f}")
    return 0 if np.all(ratios >= cfg.tolerances.crosscheck_ratio) else 1


def cmd_report(args):
    report = VerificationReport.load(args.report)
    out = args.out if args.out else Path(args.report).parent
    for path in emit_outputs(report, out).values():
        print(f"wrote {path}")
    print(f"overall: {report.status}")
    return 0 if report.passed else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="campaign configuration (JSON)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    common.add_argument("--p", type=float, help="exponent p > 1")
    common.add_argument("--n", type=int, help="critical point multiplicity")
    common.add_argument("--coeff", action="append", metavar="k:re:im", help="coefficient A_k (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pamvp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", parents=[common], help="print the spectral table")
    p.add_argument("--kmax", type=int, help="largest index shown (default n+8)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify", parents=[common], help="run the full verification campaign")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("amvp", parents=[common], help="mean value residual scan at one point")
    p.add_argument("--point", type=_parse_point, default=0j, help="centre, e.g. 0.01+0.02j (default 0)")
    p.add_argument("--alpha", type=float, action="append", help="midrange weight (repeatable)")
    p.set_defaults(func=cmd_amvp)

    p = sub.add_parser("crosscheck", parents=[common], help="grid energy minimization against the series")
    p.add_argument("--cells", type=int, nargs="+", help="cells per side, one solve each")
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("report", parents=[common], help="re-render outputs from a saved report.json")
    p.add_argument("--report", required=True, help="path to report.json")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError, CalibrationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
