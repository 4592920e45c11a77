import json
import os
import subprocess

import numpy as np
import pytest

import sparsets


def test_dantzig_two_by_two():
    fit = sparsets.solve_dantzig(np.array([[2.0, 1.0], [1.0, 2.0]]), np.array([1.0, 1.0]), 0.25)
    assert fit["status"] == "optimal"
    assert fit["objective"] == pytest.approx(0.5, abs=1e-9)
    theta = np.asarray(fit["theta_hat"])
    assert np.max(np.abs(np.array([1.0, 1.0]) - np.array([[2.0, 1.0], [1.0, 2.0]]) @ theta)) <= 0.25 + 1e-9


def test_solve_lp_textbook():
    r = sparsets.solve_lp(np.array([-3.0, -5.0]), np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]]),
                          np.array([4.0, 12.0, 18.0]))
    assert r["status"] == "optimal"
    assert r["objective"] == pytest.approx(-36.0)
    assert np.allclose(r["x"], [2.0, 6.0])


def test_shapiro_wilk_reference_value():
    r = sparsets.shapiro_wilk(np.array([1.0, 2.0, 4.0, 7.0]))
    assert r["test"] == "shapiro_wilk"
    assert r["statistic"] == pytest.approx(0.9456304828556503, abs=1e-6)
    assert r["p_value"] == pytest.approx(0.6889364384881989, abs=1e-4)


def test_simulate_and_fit_inar():
    s = sparsets.simulate_inar(0.5, np.array([0.3, 0.2, 0.2, 0.2, 0.0, 0.0]), 2000, 11)
    assert s["kind"] == "counts"
    values = np.asarray(s["values"]).ravel()
    assert values.shape == (2000,)
    assert np.all(values == np.round(values)) and values.min() >= 0
    design, response = sparsets.inar_design(values, np.asarray(s["lag_buffer"]).ravel(), 6)
    assert design.shape == (2000, 7)
    fit = sparsets.two_step_fit(design, response, 0.15, has_intercept=True, model="inar")
    assert fit["first_step"]["status"] == "optimal"
    assert 0 in fit["support"]
    assert fit["nuisance_kind"] == "inar_linear_variance"


def test_run_case_small():
    report = sparsets.run_case({"schema": 1, "case": "case1", "n": 400, "reps": 2,
                                "base_seed": 3, "lambda": {"mode": "fixed", "value": 0.2}})
    assert report["kind"] == "case_report"
    assert report["summary"]["reps"] == 2
    assert len(report["records"]) == 2


def test_f_infinity_identity():
    r = sparsets.estimate_f_infinity(np.eye(3), [0], 200, 1)
    assert r["value"] == pytest.approx(1.0, abs=1e-6)


def test_errors_map_to_python_classes():
    with pytest.raises(sparsets.ConfigError):
        sparsets.run_case({"schema": 1, "case": "nope"})
    with pytest.raises(sparsets.SparsetsError):
        sparsets.shapiro_wilk(np.array([1.0, 2.0]))
    with pytest.raises(sparsets.SparsetsError):
        sparsets.solve_dantzig(np.eye(2), np.ones(3), 0.1)
    assert issubclass(sparsets.ConfigError, sparsets.SparsetsError)
    assert issubclass(sparsets.NumericError, sparsets.SparsetsError)


@pytest.mark.skipif(not os.environ.get("SPARSETS_CLI"), reason="CLI not built")
def test_cli_finfty(tmp_path):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"matrix": [[1.0, 0.0], [0.0, 1.0]], "support": [0], "samples": 100}))
    out = tmp_path / "out.json"
    subprocess.run([os.environ["SPARSETS_CLI"], "finfty", "--config", str(cfg), "--out", str(out)],
                   check=True)
    assert json.loads(out.read_text())["estimate"]["value"] == pytest.approx(1.0, abs=1e-6)
