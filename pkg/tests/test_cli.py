from __future__ import annotations

import json
import math

import numpy as np
import pytest

from legendre_diff.cli import EXIT_INVALID, EXIT_OK, expression_function, main
from legendre_diff.errors import ValidationError


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_project_expression(workdir):
    assert main(["project", "--input", "t**2", "--degree", "2", "--out", "c.json"]) == EXIT_OK
    coeffs = json.loads((workdir / "c.json").read_text())["coeffs"]
    np.testing.assert_allclose(coeffs, [0.47140452079103173, 0.0, 0.4216370213557839], atol=1e-15)


def test_project_samples(workdir):
    t = np.linspace(-1, 1, 40)
    (workdir / "s.json").write_text(json.dumps({"t": t.tolist(), "f": (3 * t**3 - t).tolist()}))
    assert main(["project", "--input", "s.json", "--degree", "5", "--out", "c.json"]) == EXIT_OK
    coeffs = json.loads((workdir / "c.json").read_text())["coeffs"]
    assert len(coeffs) == 6
    assert abs(coeffs[5]) < 1e-12


def test_project_too_few_samples(workdir):
    (workdir / "s.json").write_text(json.dumps({"t": [0.0, 0.5], "f": [1.0, 2.0]}))
    assert main(["project", "--input", "s.json", "--degree", "5", "--out", "c.json"]) == EXIT_INVALID
    assert not (workdir / "c.json").exists()


def test_expression_rejects_unknown_names():
    with pytest.raises(ValidationError):
        expression_function("__import__('os')")


def test_differentiate_fixed_N(workdir):
    (workdir / "c.json").write_text(json.dumps({"coeffs": [0, 0, 1]}))
    assert main(["differentiate", "--coeffs", "c.json", "--r", "1", "--N", "2", "--out", "d.json"]) == EXIT_OK
    out = json.loads((workdir / "d.json").read_text())
    assert out["N"] == 2
    np.testing.assert_allclose(out["coeffs"], [0.0, 3.872983346207417], atol=1e-15)


def test_differentiate_rule(workdir):
    (workdir / "c.json").write_text(json.dumps({"coeffs": [1.0] * 30}))
    args = ["differentiate", "--coeffs", "c.json", "--r", "1", "--delta", "1e-4",
            "--mu", "4", "--p", "2", "--s", "2", "--out", "d.json"]
    assert main(args) == EXIT_OK
    out = json.loads((workdir / "d.json").read_text())
    assert out["N"] == 10 and out["count"] == 10


def test_differentiate_missing_rule_args(workdir, capsys):
    (workdir / "c.json").write_text(json.dumps({"coeffs": [1.0, 2.0]}))
    assert main(["differentiate", "--coeffs", "c.json", "--r", "1", "--delta", "1e-4", "--out", "d.json"]) == EXIT_INVALID
    assert "--mu" in capsys.readouterr().err


def test_bad_json(workdir):
    (workdir / "c.json").write_text("{not json")
    assert main(["differentiate", "--coeffs", "c.json", "--r", "1", "--N", "2", "--out", "d.json"]) == EXIT_INVALID


def test_missing_subcommand():
    assert main([]) == EXIT_INVALID


CONFIG = {"mu": 4, "s": 2, "eps": 0.01, "r": 1, "p": 2, "q_list": [2, 4, "inf"],
          "delta_list": [1e-2, 1e-3, 1e-4], "noise": {"mode": "adversarial", "indices": "top"}}


def test_experiment_and_rates(workdir):
    (workdir / "cfg.json").write_text(json.dumps(CONFIG))
    assert main(["experiment", "--config", "cfg.json", "--out", "r.csv"]) == EXIT_OK
    lines = (workdir / "r.csv").read_text().splitlines()
    assert lines[0].split(",")[:3] == ["delta", "N", "count"]
    assert len(lines) == 4
    assert main(["rates", "--results", "r.csv", "--q", "inf", "--config", "cfg.json", "--out", "f.json"]) == EXIT_OK
    fit = json.loads((workdir / "f.json").read_text())
    assert fit["q"] == "inf"
    assert fit["theoretical"] == pytest.approx(0.25)
    assert 0 <= fit["r_squared"] <= 1


def test_rates_without_config(workdir):
    (workdir / "cfg.json").write_text(json.dumps(CONFIG))
    main(["experiment", "--config", "cfg.json", "--out", "r.csv"])
    assert main(["rates", "--results", "r.csv", "--q", "2", "--out", "f.json"]) == EXIT_OK
    assert json.loads((workdir / "f.json").read_text())["theoretical"] is None


def test_experiment_invalid_config(workdir):
    bad = dict(CONFIG, mu=2.0)
    (workdir / "cfg.json").write_text(json.dumps(bad))
    assert main(["experiment", "--config", "cfg.json", "--out", "r.csv"]) == EXIT_INVALID
    assert not (workdir / "r.csv").exists()


def test_scaling(workdir):
    cfg = dict(CONFIG, p="inf", noise={"mode": "adversarial", "indices": "all"})
    (workdir / "cfg.json").write_text(json.dumps(cfg))
    args = ["scaling", "--config", "cfg.json", "--delta", "1e-6", "--N-list", "8", "16", "32", "--out", "s.json"]
    assert main(args) == EXIT_OK
    fits = json.loads((workdir / "s.json").read_text())["fits"]
    assert {(f["component"], f["metric"]) for f in fits} == {
        ("truncation", "C"), ("truncation", "L2"), ("propagation", "C"), ("propagation", "L2")
    }


def test_json_reals_have_17_digits(workdir):
    (workdir / "c.json").write_text(json.dumps({"coeffs": [0, 1]}))
    main(["differentiate", "--coeffs", "c.json", "--r", "1", "--N", "1", "--out", "d.json"])
    text = (workdir / "d.json").read_text()
    assert "1.7320508075688772" in text
    assert math.isclose(json.loads(text)["coeffs"][0], math.sqrt(3), rel_tol=1e-15)
