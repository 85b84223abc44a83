import json

import numpy as np
import pytest

import speclaw


def test_semicircle_point():
    sol = speclaw.solve_qve(speclaw.constant_profile(4), 0.0, 2.0)
    assert abs(sol["m"] - 0.41421356237309505j) < 1e-9
    assert np.all(sol["g"].imag > 0)


def test_density_mass():
    grid = np.linspace(-3, 3, 121)
    rho = speclaw.extract_density(speclaw.constant_profile(2), grid)
    assert rho.shape == (121,)
    assert abs(rho[60] - 1 / np.pi) < 1e-4
    assert abs(speclaw.integrate_density(speclaw.constant_profile(2), -3, 3) - 1) < 1e-3


def test_sample_and_count():
    a = speclaw.sample({"type": "wigner", "n": 80, "seed": 2})
    assert a.shape == (80, 80)
    assert np.array_equal(a, a.T)
    ev = np.linalg.eigvalsh(a)
    assert np.allclose(speclaw.eigenvalues(a), ev, atol=1e-12)
    assert speclaw.count_in_interval(a, -0.5, 0.5) == np.count_nonzero((ev > -0.5) & (ev <= 0.5))


def test_errors_carry_kind():
    with pytest.raises(speclaw.SpeclawError) as info:
        speclaw.solve_qve({"n": 2, "entries": [[1, 0.5], [0.4, 1]]}, 0.0, 1.0)
    assert info.value.args[0] == "InvalidProfile"


def test_local_law_report():
    cfg = {"ensemble": {"type": "wigner", "n": 200}, "trials": 2, "interval_length": 0.2}
    report = speclaw.verify_local_law(cfg)
    assert report["n"] == 200
    assert 0.0 <= report["summary"]["pass_fraction"] <= 1.0
    assert report == speclaw.verify_local_law(json.dumps(cfg))


def test_cli_entry_point():
    code, out, err = speclaw.run_cli("density", "--bogus")
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["error"] == "Config"
