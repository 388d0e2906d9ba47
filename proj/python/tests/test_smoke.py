import json
import math
import os
import subprocess

import pytest

import hypvol


def test_scalar_functions():
    assert hypvol.tube_factor(2, 1.0) == pytest.approx(2.0 * math.sinh(1.0), rel=1e-15)
    assert hypvol.tube_factor(3, 2.0) == pytest.approx(2.0 + math.sinh(2.0) * math.cosh(2.0), rel=1e-13)
    assert hypvol.lobachevsky(0.0) == 0.0
    assert hypvol.gauss_bonnet_area(1.0, 1.0, 1.0) == pytest.approx(
        math.pi - 3.0 * math.acos(math.cosh(1.0) / (1.0 + math.cosh(1.0))), rel=1e-13
    )


def test_constants():
    assert hypvol.ideal_regular_volume(2) == {"n": 2, "v_n": 3.14159265359, "method": "exact"}
    assert hypvol.ideal_regular_volume(3)["v_n"] == pytest.approx(1.0149416, abs=1e-7)


def test_vl_and_bound():
    e = hypvol.vl_estimate(2, 6.0, restarts=3)
    assert 0.0 < e["value"] < math.pi
    assert e["value"] <= e["regular_value"]
    assert hypvol.gap_bound(2, 6.0, 0.0, e["value"]) == e["value"]


def test_certificate_round_trip():
    cert = hypvol.solve_k(2, 0.1, restarts=3)
    assert cert["bound_value"] >= math.pi - 0.1
    check = hypvol.validate_certificate(cert)
    assert check["ok"]
    assert abs(check["recomputed_bound"] - cert["exact"]["bound_value"]) <= 1e-12
    with pytest.raises(RuntimeError):
        hypvol.solve_k(2, 10.0)


def test_smear_run_is_deterministic():
    a = hypvol.smear_run("genus2", 6.0, 3000, seed=4)
    b = hypvol.smear_run("genus2", 6.0, 3000, seed=4)
    assert a == b
    assert a["seed"] == 4
    assert a["mode"] == "closed"
    assert a["ratio"]["ext_mass"] == 0.0


def test_inclusion_on_torus():
    r = hypvol.inclusion_check("one_holed_torus", 4.0, 5000)
    assert r["violations"] == 0


def test_cli_matches_module():
    cli = os.environ.get("HYPVOL_CLI")
    if not cli:
        pytest.skip("HYPVOL_CLI not set")
    out = subprocess.run([cli, "vn", "--dim", "3"], check=True, capture_output=True, text=True).stdout
    assert json.loads(out) == hypvol.ideal_regular_volume(3)
