import csv
import io
import json
import re

import pytest

from pamvp.cli import main
from pamvp.errors import ConfigError
from pamvp.harness import (
    ANCHORS,
    CampaignConfig,
    Record,
    VerificationReport,
    default_config,
    emit_outputs,
    parse_coeff,
    run_campaign,
)
from pamvp.harness.report import CSV_HEADER, render_csv, render_svg
from pamvp.spectral import exponent_ratio


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


# -- configuration --------------------------------------------------------------------


def test_minimal_config_gets_defaults():
    cfg = CampaignConfig.from_dict({"p": 3, "n": 1, "coefficients": [[2, 1, 0]]})
    assert cfg.p == 3.0 and cfg.n == 1
    assert cfg.coefficients == ((2, 1.0, 0.0),)
    assert cfg.seed == 42
    assert cfg.ladder.rungs == 9
    assert cfg.crosscheck.cells == (64, 128)


def test_config_round_trips_through_dict():
    cfg = CampaignConfig.from_dict(
        {
            "p": 12,
            "n": 2,
            "coefficients": [[3, 1, 0], [4, 0.2, 0.1]],
            "ladder": {"radii": [0.1, 0.05, 0.025]},
            "crosscheck": {"cells": [32, 64], "control": False},
            "seed": 7,
        }
    )
    again = CampaignConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_output_dir_is_not_part_of_the_report_config():
    cfg = default_config().with_overrides(output_dir="somewhere")
    assert "output_dir" not in cfg.to_dict()
    assert cfg.to_dict(include_output=True)["output_dir"] == "somewhere"


@pytest.mark.parametrize(
    "data, message",
    [
        ({"n": 1, "coefficients": [[2, 1, 0]]}, "missing"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "colour": 1}, "unknown config"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "ladder": {"rung": 3}}, "unknown ladder"),
        ({"p": 3, "n": 1.5, "coefficients": [[2, 1, 0]]}, "integer"),
        ({"p": 1.0, "n": 1, "coefficients": [[2, 1, 0]]}, "p"),
        ({"p": 3, "n": 1, "coefficients": [[3, 1, 0]]}, "A_2"),
        ({"p": 3, "n": 1, "coefficients": [[2, 0, 0]]}, "A_2"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1]]}, "[k, re, im]"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "seed": -1}, "seed"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "seed": 2**64}, "seed"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "ladder": {"radii": [0.1, 0.2, 0.05]}}, "decreasing"),
        ({"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "tolerances": 5}, "object"),
    ],
)
def test_bad_configs_rejected(data, message):
    with pytest.raises(ConfigError, match=re.escape(message)):
        CampaignConfig.from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        CampaignConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        CampaignConfig.load(bad)
    with pytest.raises(ConfigError, match="object"):
        CampaignConfig.load(write_json(tmp_path / "list.json", [1, 2]))


@pytest.mark.parametrize(
    "text, expected",
    [("2:1:0", (2, 1.0, 0.0)), ("3:0.5", (3, 0.5, 0.0)), ("4:-1e-2:2.5", (4, -0.01, 2.5))],
)
def test_parse_coeff(text, expected):
    assert parse_coeff(text) == expected


@pytest.mark.parametrize("text", ["2", "a:1:0", "2:x", "2:1:0:4"])
def test_parse_coeff_rejects(text):
    with pytest.raises(ConfigError):
        parse_coeff(text)


# -- report -----------------------------------------------------------------------------


def test_empty_report_is_valid_json():
    data = json.loads(VerificationReport().to_json())
    assert data["records"] == []
    assert data["counts"] == {"records": 0, "failed": 0}
    assert data["overall"] == "pass"


def test_anchors_are_unique_and_enforced():
    assert len(set(ANCHORS)) == len(ANCHORS) == 23
    with pytest.raises(ValueError):
        Record("x", "no-such-anchor", True)


def test_non_finite_values_serialize_as_null():
    rep = VerificationReport()
    rep.add(Record("x", "exponent-ratio", False, float("nan"), float("inf"), ">="))
    data = json.loads(rep.to_json())
    assert data["records"][0]["value"] is None
    assert data["records"][0]["threshold"] is None
    assert data["overall"] == "fail"


def test_report_round_trip(tmp_path):
    rep = VerificationReport(config={"p": 3.0})
    rep.add(Record("a", "exponent-ratio", True, 2.5, 2.0, ">=", "ok"))
    rep.add(Record("b", "pull-back-identity", False, 1e-3, 1e-9, "<="))
    path = tmp_path / "report.json"
    path.write_text(rep.to_json())
    back = VerificationReport.load(path)
    assert back.to_json() == rep.to_json()
    assert [r.name for r in back.failures()] == ["b"]


def test_malformed_report_rejected(tmp_path):
    with pytest.raises(ConfigError):
        VerificationReport.load(write_json(tmp_path / "r.json", {"records": [{"name": "x"}]}))


def test_outputs_without_series(tmp_path):
    paths = emit_outputs(VerificationReport(), tmp_path / "out")
    assert sorted(paths) == ["amvp_decay.csv", "decay.svg", "report.json"]
    assert paths["amvp_decay.csv"].read_text() == ",".join(CSV_HEADER) + "\n"
    assert "below noise floor" in paths["decay.svg"].read_text()


# -- campaigns ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def amvp_report():
    cfg = CampaignConfig(p=3.0, n=1, coefficients=((2, 1.0, 0.0), (3, 0.1, 0.0)))
    return run_campaign(cfg, steps=["amvp"])


def test_partial_campaign_records(amvp_report):
    names = [r.name for r in amvp_report.records]
    assert "critical_slope_p_weight" in names
    assert sum(n.startswith("probe_") and n.endswith("_slope") and "swapped" not in n for n in names) == 8
    assert amvp_report.passed, [r.to_dict() for r in amvp_report.failures()]
    assert {r.anchor for r in amvp_report.records} == {
        "critical-point-amvp",
        "noncritical-amvp",
        "weight-swap-control",
    }


def test_svg_labels_match_report_slopes(amvp_report):
    svg = render_svg(amvp_report.series["amvp_critical"])
    labels = re.findall(r"alpha=([0-9.]+) slope=([0-9.]+)", svg)
    fits = amvp_report.series["amvp_critical"]["fits"]
    assert len(labels) == len(fits) == 6
    for (alpha, slope), fit in zip(labels, fits):
        assert float(slope) == pytest.approx(fit["slope"], abs=5e-5)
    target = exponent_ratio(default_config().params)
    assert all(abs(float(s) - target) < 0.15 for a, s in labels if float(a) > 0)


def test_csv_two_point_slopes(amvp_report):
    rows = list(csv.DictReader(io.StringIO(render_csv(amvp_report.series["amvp_critical"]))))
    assert len(rows) == 6 * 9
    windows = [float(r["slope_window"]) for r in rows if r["slope_window"] and float(r["alpha"]) == 1.0]
    assert len(windows) == 8
    assert windows[-1] == pytest.approx(exponent_ratio(default_config().params), abs=0.05)


def test_identity_campaign_residuals_below_floor(tmp_path):
    cfg = default_config(2.0).with_overrides(output_dir=tmp_path)
    rep = run_campaign(cfg, steps=["amvp"])
    assert rep.passed
    rows = list(csv.DictReader((tmp_path / "amvp_decay.csv").open()))
    assert rows and all(r["slope_window"] == "" for r in rows)
    assert all(f is None for f in rep.series["amvp_critical"]["fits"])
    # no weight-swap control at p = 2: the weights are (0, 1)
    assert not any(r.anchor == "weight-swap-control" for r in rep.records)


def test_step_failure_becomes_record():
    # discs far outside the certified region cannot be evaluated
    cfg = CampaignConfig.from_dict({**default_config().to_dict(), "ladder": {"radii": [10.0, 5.0, 2.5]}})
    rep = run_campaign(cfg, steps=["amvp"])
    assert [r.name for r in rep.records] == ["amvp_error"]
    assert "DiscEvaluationError" in rep.records[0].detail
    assert rep.status == "fail"


def test_campaign_is_reproducible(tmp_path):
    cfg = CampaignConfig(p=3.0, n=1, coefficients=((2, 1.0, 0.0), (3, 0.1, 0.0)))
    a = run_campaign(cfg.with_overrides(output_dir=tmp_path / "a"), steps=["spectral", "inequalities", "su_mu"])
    b = run_campaign(cfg.with_overrides(output_dir=tmp_path / "b"), steps=["spectral", "inequalities", "su_mu"])
    assert a.passed
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


# -- command line ---------------------------------------------------------------------------


def test_cli_coeffs(capsys):
    assert main(["coeffs", "--p", "3", "--kmax", "4"]) == 0
    out = capsys.readouterr().out
    assert "1.372281323269014" in out
    assert "exponent ratio  2.748708889860278" in out


def test_cli_amvp_multi_term(capsys):
    assert main(["amvp", "--p", "3", "--coeff", "2:1", "--coeff", "3:0.1"]) == 0
    assert "slope 2.75" in capsys.readouterr().out


def test_cli_amvp_noncritical_point(capsys):
    assert main(["amvp", "--p", "3", "--point", "0.05+0.02i", "--alpha", "0.2"]) == 0
    out = capsys.readouterr().out
    assert "alpha=0.2000" in out


def test_cli_bad_config(tmp_path, capsys):
    path = write_json(tmp_path / "c.json", {"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "bogus": 1})
    assert main(["coeffs", "--config", str(path)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_cli_bad_coefficient(capsys):
    assert main(["coeffs", "--coeff", "1:1:0"]) == 2


def test_cli_report_rerenders(tmp_path, capsys):
    rep = VerificationReport()
    rep.add(Record("a", "exponent-ratio", True, 2.5, 2.0, ">="))
    src = tmp_path / "report.json"
    src.write_text(rep.to_json())
    assert main(["report", "--report", str(src), "--out", str(tmp_path / "re")]) == 0
    assert (tmp_path / "re" / "report.json").read_text() == rep.to_json()
    rep.add(Record("b", "exponent-ratio", False))
    src.write_text(rep.to_json())
    assert main(["report", "--report", str(src)]) == 1
    assert main(["report", "--report", str(tmp_path / "nope.json")]) == 2
