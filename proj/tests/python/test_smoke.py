import json
import math
import os
import subprocess

import numpy as np
import pytest

import maxgrid


def test_covariance_sequence_values():
    cov = maxgrid.covariance_sequence(alpha=2.0, c=1.0, h=1.0, n=3)
    assert cov[0] == pytest.approx(1.0)
    assert cov[1] == pytest.approx(math.exp(-1.0), rel=1e-12)
    cov2 = maxgrid.covariance_sequence(alpha=1.0, c=2.0, h=0.5, n=3)
    assert cov2[2] == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_circulant_embed_white_noise():
    eig = maxgrid.circulant_embed([1.0, 0.0, 0.0, 0.0])
    assert np.allclose(eig, 1.0)


def test_scalar_paths_shape_and_determinism():
    a = maxgrid.sample_scalar_paths(alpha=1.0, c=1.0, h=0.1, n=64, reps=5, seed=42)
    b = maxgrid.sample_scalar_paths(alpha=1.0, c=1.0, h=0.1, n=64, reps=5, seed=42)
    c = maxgrid.sample_scalar_paths(alpha=1.0, c=1.0, h=0.1, n=64, reps=5, seed=43)
    assert a.shape == (5, 64)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_engines_are_both_exact():
    for engine in ("recursive", "circulant"):
        paths = maxgrid.sample_scalar_paths(
            alpha=1.0, c=1.0, h=0.1, n=32, reps=4000, seed=1, engine=engine
        )
        lag1 = float(np.mean(paths[:, 0] * paths[:, 1]))
        assert lag1 == pytest.approx(math.exp(-0.1), abs=0.06)


def test_fbm_anchoring_and_degenerate_hurst():
    paths = maxgrid.sample_fbm(hurst=0.7, h=0.25, n=16, reps=3, seed=9)
    assert np.all(paths[:, 0] == 0.0)
    line = maxgrid.sample_fbm(hurst=1.0, h=0.5, n=8, reps=2, seed=9)
    t = 0.5 * np.arange(8)
    for row in line:
        slope = row[1] / 0.5
        assert np.allclose(row, slope * t, rtol=1e-12, atol=1e-12)


def test_h_alpha_estimator_alpha2_small_lambda():
    est = maxgrid.estimate_h_alpha(alpha=2.0, lambda_=1.0, mesh=0.002, reps=40000, seed=3)
    exact = 1.0 / math.sqrt(math.pi) + 1.0
    assert est["value"] == pytest.approx(exact, abs=5 * max(est["stderr"], 1e-3))


def test_anchored_constant_matches_closed_form():
    a = maxgrid.anchored_grid_constant(alpha=2.0, d=0.5, lambda_=6.0, reps=100000, seed=5)
    assert a["anchored"]
    assert a["value"] == pytest.approx(maxgrid.h_d2_closed_form(0.5), rel=0.05)


def test_classify_grid():
    assert maxgrid.classify_grid("constant", 1.0)[0] == "sparse"
    kind, d = maxgrid.classify_grid("pickands", 0.5)
    assert kind == "pickands" and d == 0.5
    assert maxgrid.classify_grid("powerlog", 2.0)[0] == "dense"
    with pytest.raises(maxgrid.MaxgridError):
        maxgrid.classify_grid("powerlog", 1.0)


def test_norm_constants_reference_values():
    t = math.exp(2.0)
    a, b = maxgrid.norm_constants(t, 1.0, 1.0, "continuous", h_constant=1.0)
    assert a == pytest.approx(2.0)
    assert b == pytest.approx(2.0 + math.log(2.0 / math.sqrt(2 * math.pi)) / 2.0, rel=1e-12)
    _, bs = maxgrid.norm_constants(t, 1.0, 1.0, "sparse", delta=1.0)
    assert bs == pytest.approx(2.0 - math.log(2.0 * math.sqrt(2 * math.pi)) / 2.0, rel=1e-12)


def test_f_case_printed_values():
    assert maxgrid.f_case("T21_i", 0, 0, 0) == pytest.approx(3.0)
    assert maxgrid.f_case("T21_iv", 0, 0, 0) == pytest.approx(2.0)
    assert maxgrid.f_case("T21_ii", 0, 0, 0, theta1=0.0, theta2=math.log(2.0)) == pytest.approx(2.5)
    assert maxgrid.f_case("T22_iii", -1, 0, 2) == pytest.approx(math.e)


def test_f_case_with_estimated_constants():
    batch = maxgrid.ConstantBatch(alpha=1.0, lambda_=8.0, mesh=0.25, continuous=True,
                                  ds=[0.5], reps=500, seed=11)
    f = maxgrid.f_case("T21_iii", 0.0, 0.0, 0.0, d2=0.5, constants=batch)
    assert 0.0 <= f <= 3.0


def test_eval_g_and_gumbel_marginal():
    v = maxgrid.eval_g(r_diag=[0.0], x=[0.0], y1=[0.0], y2=[0.0])
    assert v == pytest.approx(math.exp(-3.0), rel=1e-12)
    big = 40.0
    lam0 = maxgrid.eval_g(r_diag=[0.0], x=[0.0], y1=[big], y2=[big])
    assert lam0 == pytest.approx(math.exp(-1.0), rel=1e-9)
    gh = maxgrid.eval_g(r_diag=[1.0], x=[0.0], y1=[0.0], y2=[0.0], method="gauss_hermite")
    mc = maxgrid.eval_g(r_diag=[1.0], x=[0.0], y1=[0.0], y2=[0.0], method="monte_carlo",
                        mc_reps=200000, mc_seed=5)
    assert gh == pytest.approx(mc, abs=0.01)


def test_run_experiment_json_roundtrip():
    config = {
        "schema_version": 1,
        "process": {"components": [{"alpha": 1.0, "c": 1.0, "r": 0.0}]},
        "grids": [{"form": "constant", "param": 1.0}, {"form": "powerlog", "param": 2.0}],
        "case": {"tag": "T21_iv"},
        "estimation": {"lambda": 6.0, "reps": 20000},
        "experiment": {"ln_t_values": [3.0], "reps": 300, "seed": 11, "mesh_epsilon": 0.2},
    }
    report = json.loads(maxgrid.run_experiment_json(json.dumps(config)))
    assert report["per_t"][0]["sup_distance"] < 0.5
    assert len(report["per_t"][0]["points"]) == 125
    again = json.loads(maxgrid.run_experiment_json(json.dumps(config)))
    assert report == again


def test_cli_binary_if_available():
    cli = os.environ.get("MAXGRID_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("CLI path not provided")
    out = subprocess.run(
        [cli, "constants", "--kind", "H", "--alpha", "2", "--lambda", "1",
         "--mesh", "0.01", "--reps", "2000", "--seed", "7"],
        capture_output=True, text=True, check=True)
    assert out.stdout.startswith("kind,alpha,")
