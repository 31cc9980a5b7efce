"""Campaign configuration: a single JSON document plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError, DomainError
from ..hodograph import CoefficientSet
from ..spectral import ProblemParams

DEFAULT_SEED = 42
_U64 = 2**64


@dataclass(frozen=True)
class Ladder:
    """Radii for decay fits. ``radii`` wins over ``r0``; ``r0`` defaults to a fraction of the certified disc."""

    r0_fraction: float = 0.3
    r0: float | None = None
    rungs: int = 9
    radii: tuple | None = None
    resolution: int = 32
    probe_fraction: float = 0.6
    probes: int = 8


@dataclass(frozen=True)
class Tolerances:
    roundtrip: float = 1e-10
    pullback: float = 1e-9
    gradient: float = 1e-6
    richardson_min: float = 1.8
    wrong_p_slope_max: float = 0.5
    su_mu_rel: float = 1e-8
    singular_gap_margin: float = 0.1
    critical_slope_margin: float = 0.15
    noncritical_slope_min: float = 2.0
    control_slope_max: float = 2.15
    crosscheck_ratio: float = 1.5
    chord_lower_min: float = 1e-6
    bounded_growth: float = 2.0


@dataclass(frozen=True)
class Crosscheck:
    cells: tuple = (64, 128)
    center_fraction: float = 0.5
    half_width_fraction: float = 0.2
    control: bool = True


@dataclass(frozen=True)
class CampaignConfig:
    p: float
    n: int
    coefficients: tuple
    ladder: Ladder = field(default_factory=Ladder)
    tolerances: Tolerances = field(default_factory=Tolerances)
    crosscheck: Crosscheck = field(default_factory=Crosscheck)
    samples: int = 10_000
    roundtrip_points: int = 1000
    output_dir: str | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        try:
            p, n = float(self.p), float(self.n)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"p and n must be numbers: {exc}") from exc
        if n != int(n):
            raise ConfigError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", int(n))
        coeffs = tuple(_triple(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < _U64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.samples < 1 or self.roundtrip_points < 1:
            raise ConfigError("sample counts must be positive")
        if self.ladder.radii is not None:
            radii = tuple(float(r) for r in self.ladder.radii)
            if len(radii) < 3 or any(b >= a for a, b in zip(radii, radii[1:])) or radii[-1] <= 0:
                raise ConfigError("ladder radii must be positive, strictly decreasing, at least 3")
            object.__setattr__(self, "ladder", replace(self.ladder, radii=radii))
        try:
            self.coeffset
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(float(self.p), int(self.n))

    @property
    def coeffset(self) -> CoefficientSet:
        return CoefficientSet.from_triples(self.params, self.coefficients)

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        data = dict(data)
        for key in ("p", "n", "coefficients"):
            if key not in data:
                raise ConfigError(f"missing required key {key!r}")
        sections = {"ladder": Ladder, "tolerances": Tolerances, "crosscheck": Crosscheck}
        for key, kind in sections.items():
            if key in data:
                data[key] = _section(kind, data[key], key)
        _reject_unknown(cls, data, "config")
        if "crosscheck" in data:
            data["crosscheck"] = replace(data["crosscheck"], cells=tuple(int(c) for c in data["crosscheck"].cells))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self, include_output=False) -> dict:
        """Plain JSON-ready form; the output directory is left out unless asked for."""
        out = asdict(self)
        out["coefficients"] = [list(c) for c in self.coefficients]
        out["crosscheck"]["cells"] = list(self.crosscheck.cells)
        if self.ladder.radii is not None:
            out["ladder"]["radii"] = list(self.ladder.radii)
        if not include_output:
            out.pop("output_dir")
        return out

    def with_overrides(self, p=None, n=None, coefficients=None, seed=None, output_dir=None):
        changes = {}
        if p is not None:
            changes["p"] = float(p)
        if n is not None:
            changes["n"] = int(n)
        if coefficients:
            changes["coefficients"] = tuple(coefficients)
        if seed is not None:
            changes["seed"] = int(seed)
        if output_dir is not None:
            changes["output_dir"] = str(output_dir)
        return replace(self, **changes)


def _triple(c):
    if len(c) != 3:
        raise ConfigError(f"coefficient entries are [k, re, im], got {c!r}")
    k, re, im = c
    if float(k) != int(k):
        raise ConfigError(f"coefficient index must be an integer, got {k!r}")
    return (int(k), float(re), float(im))


def _section(kind, value, name):
    if isinstance(value, kind):
        return value
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be an object")
    _reject_unknown(kind, value, name)
    return kind(**value)


def _reject_unknown(kind, data, name):
    known = {f.name for f in fields(kind)}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown {name} key(s): {', '.join(extra)}")


def parse_coeff(text: str):
    """``"k:re:im"`` (``im`` optional) to a ``(k, re, im)`` triple."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"expected k:re:im, got {text!r}")
    try:
        k = int(parts[0])
        re = float(parts[1])
        im = float(parts[2]) if len(parts) == 3 else 0.0
    except ValueError as exc:
        raise ConfigError(f"bad coefficient {text!r}: {exc}") from exc
    return (k, re, im)


def default_config(p: float = 3.0, n: int = 1) -> CampaignConfig:
    """Single leading coefficient ``A_{n+1} = 1``."""
    return CampaignConfig(p=p, n=n, coefficients=((n + 1, 1.0, 0.0),))
