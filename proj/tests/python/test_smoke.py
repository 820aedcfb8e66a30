"""Smoke tests for the python surface and the command-line tool."""

import json
import math
import os
import pathlib
import subprocess

import pytest

import greclab


def test_exact_magnetization_values():
    assert greclab.exact_magnetization(0.0) == 0.0
    assert greclab.exact_magnetization(1.0) == pytest.approx(0.5 + 0.5 / math.sqrt(2), abs=1e-12)
    assert greclab.exact_magnetization(2.0) == pytest.approx(0.5 + 2 / (2 * math.sqrt(5)), abs=1e-12)


def test_oracle_agrees_with_formula():
    for lam in (1.0, 1.7, 2.9, 3.5):
        assert greclab.oracle_magnetization(lam) == pytest.approx(
            greclab.exact_magnetization(lam), abs=1e-8
        )


def test_circuit_census_and_simulation():
    circ = greclab.ground_state_circuit(1.7)
    assert circ.width == 4
    assert circ.single_qubit_gate_count() == 10
    assert greclab.simulate_mean_z(1.7) == pytest.approx(
        greclab.exact_magnetization(1.7), abs=1e-8
    )
    # circuits serialize to JSON
    doc = json.loads(circ.to_json())
    assert doc["width"] == 4
    assert len(doc["gates"]) > 10


def test_noise_moves_the_expectation():
    noise = greclab.NoiseModel()
    noise.p1 = 0.01
    noise.p2 = 0.02
    noisy = greclab.simulate_mean_z(2.0, noise)
    assert abs(noisy - greclab.exact_magnetization(2.0)) > 1e-4


def test_grec_fit_recovers_a_shift():
    lambdas = [1.0, 1.5, 2.0, 2.5]
    exact = [greclab.exact_magnetization(x) for x in lambdas]
    shifted = [v + 0.07 for v in exact]
    fit = greclab.grec_fit(lambdas, [shifted], exact)
    assert fit.etas[0] == pytest.approx(1.0, abs=1e-10)
    assert fit.eta0 == pytest.approx(-0.07, abs=1e-10)
    mitigated = greclab.grec_apply(fit, lambdas, [shifted])
    assert mitigated == pytest.approx(exact, abs=1e-10)


def test_baseline_fit():
    lambdas = [1.0, 1.5, 2.0, 2.5]
    exact = [greclab.exact_magnetization(x) for x in lambdas]
    noisy = [0.8 * v + 0.05 for v in exact]
    fit = greclab.baseline_fit(lambdas, noisy, exact)
    assert fit.eta1 == pytest.approx(1.25, abs=1e-9)
    assert fit.eta0 == pytest.approx(-0.0625, abs=1e-9)


def test_chebyshev_roundtrip_and_bound():
    xs = [-1.0 + 2.0 * i / 99 for i in range(100)]
    ys = [0.3 + 0.5 * x for x in xs]
    ext = greclab.cheb_fit(xs, ys, 3)
    assert greclab.cheb_eval(ext, 0.25) == pytest.approx(0.425, abs=1e-10)
    out = greclab.error_bound(1.0, rho=2.0, Q=1.0, eps=1e-8, n_terms=8)
    assert out["alpha"] == pytest.approx(1.0, abs=1e-14)
    assert out["r"] == pytest.approx(0.5, abs=1e-14)
    lo, hi = greclab.extrapolation_range(2.0)
    assert (lo, hi) == (1.0, pytest.approx(1.25))


def test_zne_scale_factors_and_folding():
    factors = greclab.zne_default_scale_factors()
    assert len(factors) == 9
    assert factors[1] - factors[0] == pytest.approx(0.1125, abs=1e-12)
    circ = greclab.ground_state_circuit(2.0)
    folded = greclab.fold_circuit(circ, 1.8, "gate", seed=5)
    k = circ.gate_count()
    assert folded.achieved_scale == pytest.approx(1.8, abs=1.0 / k)
    assert folded.circuit.gate_count() > k


def test_zne_zero_noise_fixed_point():
    grid = [1.0, 2.0, 3.0]
    values = greclab.zne_curve(grid)
    for lam, v in zip(grid, values):
        assert v == pytest.approx(greclab.exact_magnetization(lam), abs=1e-9)


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("GRECLAB_CLI")
    if not path or not pathlib.Path(path).exists():
        pytest.skip("GRECLAB_CLI not set")
    return path


def test_cli_oracle(tmp_path, cli):
    out = tmp_path / "run"
    proc = subprocess.run([cli, "oracle", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    exact = (out / "curves" / "lambda" / "exact.csv").read_text().splitlines()
    assert exact[0] == "lambda,value,stderr,label"
    assert len(exact) == 27  # header + 26 grid points


def test_cli_json_mirrors(tmp_path, cli):
    out = tmp_path / "run"
    proc = subprocess.run(
        [cli, "oracle", "--out", str(out), "--format", "json"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    doc = json.loads((out / "curves" / "lambda" / "exact.json").read_text())
    assert doc["label"] == "exact"
    assert len(doc["lambda"]) == 26


def test_cli_baseline_offset_only(tmp_path, cli):
    out = tmp_path / "run"
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"noise": {"global_depol_end": 0.15}}')
    proc = subprocess.run(
        [cli, "baseline", "--offset-only", "--config", str(cfg), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    fit = json.loads((out / "fits" / "baseline_t1.json").read_text())
    assert fit["etas"][0] == 1.0


def test_cli_rejects_unknown_flags(tmp_path, cli):
    proc = subprocess.run(
        [cli, "oracle", "--no-such-flag"], capture_output=True, text=True, cwd=tmp_path
    )
    assert proc.returncode == 2


def test_cli_config_error_exit_code(tmp_path, cli):
    bad = tmp_path / "bad.json"
    bad.write_text('{"unknown_section": {}}')
    proc = subprocess.run(
        [cli, "oracle", "--config", str(bad), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
