"""Verification records, the report container, and deterministic file output.

Floats are written with Python's shortest round-trip ``repr`` and JSON keys
are sorted, so identical campaigns give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..amvp import noise_floor
from ..errors import ConfigError

# Every record points at one of these; the README maps them to the results they audit.
ANCHORS = (
    "spectral-bounds",
    "coupling-bounds",
    "first-coupling-bound",
    "exponent-ratio",
    "power-chord-inequality",
    "power-chord-lower-bound",
    "first-term-injectivity",
    "comparable-modulus-injectivity",
    "leading-term-estimates",
    "perturbation-estimates",
    "linear-case-reduction",
    "inversion-round-trip",
    "pull-back-identity",
    "complex-gradient",
    "p-laplacian-certificate",
    "symmetric-extrema",
    "vanishing-integral",
    "singular-expansion",
    "critical-point-amvp",
    "noncritical-amvp",
    "weight-swap-control",
    "energy-minimizer",
    "energy-minimizer-control",
)

PASS, FAIL = "pass", "fail"
CSV_HEADER = ("r", "alpha", "residual", "slope_window")


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class Record:
    name: str
    anchor: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    relation: str = ""
    detail: str = ""

    def __post_init__(self):
        if self.anchor not in ANCHORS:
            raise ValueError(f"unknown anchor {self.anchor!r}")
        self.passed = bool(self.passed)
        self.value = _finite_or_none(self.value)
        self.threshold = _finite_or_none(self.threshold)

    @property
    def status(self):
        return PASS if self.passed else FAIL

    def to_dict(self):
        return {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "value": self.value,
            "threshold": self.threshold,
            "relation": self.relation,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d["name"],
            anchor=d["anchor"],
            passed=d["status"] == PASS,
            value=d.get("value"),
            threshold=d.get("threshold"),
            relation=d.get("relation", ""),
            detail=d.get("detail", ""),
        )


@dataclass
class VerificationReport:
    config: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def status(self):
        return PASS if self.passed else FAIL

    def add(self, record: Record):
        self.records.append(record)

    def failures(self):
        return [r for r in self.records if not r.passed]

    def to_dict(self):
        return {
            "config": self.config,
            "overall": self.status,
            "counts": {"records": len(self.records), "failed": len(self.failures())},
            "records": [r.to_dict() for r in self.records],
            "series": self.series,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        return cls(
            config=d.get("config", {}),
            records=[Record.from_dict(r) for r in d.get("records", [])],
            series=d.get("series", {}),
        )

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise OSError(f"cannot read report {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        try:
            return cls.from_dict(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: malformed report ({exc!r})") from exc


# -- decay series -------------------------------------------------------------


def _fmt(x):
    return "" if x is None else repr(float(x))


def decay_rows(series: dict):
    """``(r, alpha, residual, slope_window)`` rows of the critical-point ladder.

    ``slope_window`` is the two-point slope between a rung and the previous
    (larger) one, blank when either residual is at the noise floor.
    """
    if not series:
        return []
    radii = series["radii"]
    floors = noise_floor(series["scales"])
    rows = []
    for alpha, res in zip(series["alphas"], series["residuals"]):
        prev = None
        for j, (r, v) in enumerate(zip(radii, res)):
            usable = abs(v) > floors[j]
            slope = None
            if usable and prev is not None:
                slope = math.log(abs(v) / abs(res[prev])) / math.log(r / radii[prev])
            rows.append((r, alpha, v, slope))
            prev = j if usable else None
    return rows


def render_csv(series: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r, alpha, v, slope in decay_rows(series):
        writer.writerow((_fmt(r), _fmt(alpha), _fmt(v), _fmt(slope)))
    return buf.getvalue()


_PALETTE = ("#1b6ca8", "#d1495b", "#edae49", "#00798c", "#6a4c93", "#30638e", "#8d6a9f", "#3a7d44")
_W, _H = 720, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 220, 30, 50


def slope_label(alpha, slope):
    return f"alpha={alpha:.4f} slope={slope:.4f}"


def render_svg(series: dict) -> str:
    """Log-log scatter of |residual| against r with one fitted line per weight."""
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    points = []
    if series:
        floors = noise_floor(series["scales"])
        for i, res in enumerate(series["residuals"]):
            for j, (r, v) in enumerate(zip(series["radii"], res)):
                if abs(v) > floors[j]:
                    points.append((i, math.log10(r), math.log10(abs(v))))
    x0, x1 = _LEFT, _W - _RIGHT
    y0, y1 = _H - _BOTTOM, _TOP
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{_H - 12}" text-anchor="middle" font-size="13">log10 r</text>')
    out.append(
        f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {(y0 + y1) // 2})">log10 |residual|</text>'
    )
    if not points:
        out.append(
            f'<text x="{(x0 + x1) // 2}" y="{(y0 + y1) // 2}" text-anchor="middle" font-size="14">'
            "all residuals below noise floor</text>"
        )
        out.append("</svg>")
        return "\n".join(out) + "\n"

    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    xpad = 0.05 * (xhi - xlo or 1.0)
    ypad = 0.05 * (yhi - ylo or 1.0)
    xlo, xhi, ylo, yhi = xlo - xpad, xhi + xpad, ylo - ypad, yhi + ypad

    def sx(x):
        return x0 + (x - xlo) / (xhi - xlo) * (x1 - x0)

    def sy(y):
        return y0 - (y - ylo) / (yhi - ylo) * (y0 - y1)

    for tick in range(math.ceil(xlo), math.floor(xhi) + 1):
        out.append(f'<text x="{sx(tick):.2f}" y="{y0 + 16}" text-anchor="middle" font-size="11">{tick}</text>')
    for tick in range(math.ceil(ylo), math.floor(yhi) + 1):
        out.append(f'<text x="{x0 - 6}" y="{sy(tick) + 4:.2f}" text-anchor="end" font-size="11">{tick}</text>')

    for i, lx, ly in points:
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<circle cx="{sx(lx):.2f}" cy="{sy(ly):.2f}" r="3" fill="{color}"/>')

    label_y = _TOP + 10
    for i, (alpha, fit) in enumerate(zip(series["alphas"], series["fits"])):
        if fit is None:
            continue
        color = _PALETTE[i % len(_PALETTE)]
        mine = [p[1] for p in points if p[0] == i]
        a, b = min(mine), max(mine)
        # the fit is in natural logs; the slope is base independent
        ya = fit["slope"] * a + fit["intercept"] / math.log(10)
        yb = fit["slope"] * b + fit["intercept"] / math.log(10)
        out.append(
            f'<line x1="{sx(a):.2f}" y1="{sy(ya):.2f}" x2="{sx(b):.2f}" y2="{sy(yb):.2f}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{x1 + 10}" y="{label_y}" font-size="12" fill="{color}">'
            f"{slope_label(alpha, fit['slope'])}</text>"
        )
        label_y += 18
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_outputs(report: VerificationReport, directory) -> dict:
    """Write report.json, amvp_decay.csv and decay.svg; return their paths."""
    directory = Path(directory)
    series = report.series.get("amvp_critical", {})
    files = {
        "report.json": report.to_json(),
        "amvp_decay.csv": render_csv(series),
        "decay.svg": render_svg(series),
    }
    paths = {}
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = directory / name
            path.write_text(text, encoding="utf-8", newline="\n")
            paths[name] = path
    except OSError as exc:
        raise OSError(f"cannot write outputs to {directory}: {exc}") from exc
    return paths
