import json
import math
from pathlib import Path

import numpy as np
import pytest

import nsslip

SMALL = {
    "domain": {"nx": 8, "ny": 8},
    "physics": {"steps": 16},
    "basis": {"n": 6},
    "initial_state": {"coefficients": [0.5]},
    "noise": {"family": "MULTIPLICATIVE_DAMPED", "channels": 2, "bound_l": 0.01},
    "target": {"kind": "vortex", "amplitude": 0.2},
    "monte_carlo": {"samples": 8, "seed": 3},
}


def test_normalize_round_trip():
    cfg = nsslip.normalize_config(SMALL)
    assert cfg["basis"]["n"] == 6
    assert nsslip.normalize_config(cfg) == cfg


def test_config_error_names_field():
    bad = dict(SMALL, physics={"nu": -1.0})
    with pytest.raises(ValueError, match="physics.nu"):
        nsslip.normalize_config(bad)


def test_spectrum_approaches_stokes_value():
    lam = nsslip.spectrum(16, 16, 3)
    assert np.all(np.diff(lam) >= 0)
    assert abs(lam[0] / (2 * math.pi**2) - 1) < 0.05


def test_evaluate_shapes():
    out = nsslip.evaluate(SMALL)
    assert out["cost"] > 0
    assert out["grad_a"].shape == out["grad_b"].shape
    assert out["grad_a"].shape[1] == 17


def test_run_writes_manifest(tmp_path: Path):
    rc, log = nsslip.run("simulate", SMALL, str(tmp_path / "sim"))
    assert rc == 0, log
    manifest = json.loads((tmp_path / "sim" / "manifest.json").read_text())
    for rel in manifest["outputs"]:
        assert (tmp_path / "sim" / rel).exists()
    assert manifest["seed"] == 3
