"""Smoke tests for the python module: import, tiny run, error mapping."""

import json
import math
import os
import tempfile

import pytest

import mcflow


def test_contact_closure_values():
    assert mcflow.contact_closure(0.0, 0.0) == 0.0
    assert mcflow.contact_closure(0.0, 0.6) == pytest.approx(0.75, rel=1e-12)
    assert mcflow.contact_closure(0.0, -0.6) == pytest.approx(-0.75, rel=1e-12)
    # closure identity
    ug = mcflow.contact_closure(2.0, 0.3)
    assert ug == pytest.approx(0.3 * math.sqrt(1 + 4 + ug * ug), rel=1e-12)


def test_preset_json_round_trips_through_json():
    cfg = json.loads(mcflow.preset_json("mt1_constant"))
    assert cfg["experiment"] == "mt1_constant"
    assert cfg["h"] == pytest.approx(0.005)
    assert cfg["shape"]["kind"] == "interval"


def test_stable_dt_positive_and_h_monotone():
    cfg = json.loads(mcflow.preset_json("mt1_constant"))
    dt1 = mcflow.stable_dt(json.dumps(cfg))
    cfg["h"] = 0.01
    dt2 = mcflow.stable_dt(json.dumps(cfg))
    assert 0 < dt1 < dt2  # coarser grid allows a larger step


def test_tiny_experiment_runs_and_reports():
    cfg = json.loads(mcflow.preset_json("custom"))
    cfg.update(
        {
            "h": 0.02,
            "u0": {"kind": "cos_mode", "amplitude": 0.5, "mode": 1},
            "stepping": {"t_end": 0.2, "tol_steady": 0.0},
            "output": "pysmoke",
        }
    )
    with tempfile.TemporaryDirectory() as tmp:
        os.environ["MCFLOW_OUT_ROOT"] = tmp
        try:
            out = mcflow.run_experiment(json.dumps(cfg))
        finally:
            del os.environ["MCFLOW_OUT_ROOT"]
        assert out["exit_code"] == 0
        summary = json.loads(out["summary_json"])
        assert summary["verdict"] == "timeout"
        assert os.path.exists(os.path.join(out["output_dir"], "monitors.csv"))


def test_validation_error_maps_to_python():
    with pytest.raises(mcflow.ValidationError):
        mcflow.run_experiment('{"experiment": "custom", "h": -1}')
    with pytest.raises(mcflow.ConfigParseError):
        mcflow.preset_json and mcflow.run_experiment("{broken")


def test_identity_suite_passes():
    with tempfile.TemporaryDirectory() as tmp:
        out = mcflow.run_identity_suite(os.path.join(tmp, "identity"))
        assert out["exit_code"] == 0
        summary = json.loads(out["summary_json"])
        assert summary["all_pass"] is True
        assert len(summary["checks"]) == 5
