import csv
import json
import math

import numpy as np
import pytest

from coupling_estimation.cli import main, parse_grid
from coupling_estimation.fock import TwoModeState, dump_state, random_state


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_optimize_fixture(capsys):
    code, out, _ = run(capsys, "optimize", "--mu", "1.0", "--dmax", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["format_version"] == 1
    assert doc["config"]["mu_prime"] == 1.0 and doc["config"]["d_max"] == 1
    res = doc["result"]
    assert (res["lambda"], res["energy"], res["cost"]) == pytest.approx((1, 1 / 3, 2 / 3), abs=1e-12)


@pytest.mark.parametrize("mu", ["0", "-1", "nan"])
def test_optimize_bad_mu(capsys, mu):
    code, _, err = run(capsys, "optimize", "--mu", mu)
    assert code == 2 and "usage error" in err


def test_usage_errors(capsys):
    assert run(capsys, "optimize")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "scaling", "--grid", "1:2:3")[0] == 2
    assert run(capsys, "scaling", "--fit", "5:1")[0] == 2


def test_optimize_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "optimize", "--mu", "0.5", "--out", str(a), "--vector-out", str(tmp_path / "v.json"))
    run(capsys, "optimize", "--mu", "0.5", "--out", str(b), "--vector-out", str(tmp_path / "v.json"))
    assert a.read_bytes() == b.read_bytes()
    vec = json.loads((tmp_path / "v.json").read_text())
    assert set(vec) == {"d_min", "d_max", "amps"}


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("COUPLING_ESTIMATION_OUT", str(tmp_path / "runs"))
    assert run(capsys, "optimize", "--mu", "0.5", "--out", "o.json")[0] == 0
    assert (tmp_path / "runs" / "o.json").exists()


def test_parse_grid():
    g = parse_grid("1e-3:10:5:log")
    np.testing.assert_allclose(g, [1e-3, 1e-2, 1e-1, 1, 10])
    np.testing.assert_allclose(parse_grid("1:2:3:lin"), [1, 1.5, 2])
    np.testing.assert_allclose(parse_grid("0.4:9:1:log"), [0.4])


def test_scaling_single_point(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "scaling", "--grid", "0.5:0.5:1:log", "--csv", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["mu_prime", "branch", "lambda", "energy", "cost"]
    assert len(rows) == 2
    assert json.loads(out)["fit"] is None
    # 17 significant digits round-trip exactly
    assert float(rows[1][3]) == json.loads(out)["max_energy"]


def test_scaling_branches_above_ground(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "scaling", "--grid", "1e-2:1:12:log", "--branches", "4",
                       "--fit", "0.5:5", "--csv", str(path))
    assert code == 0
    rows = [r for r in csv.DictReader(path.open())]
    ground = sorted((float(r["energy"]), float(r["cost"])) for r in rows if r["branch"] == "0")
    n0, c0 = np.array(ground).T
    for r in rows:
        n = float(r["energy"])
        if r["branch"] != "0" and n0[0] <= n <= n0[-1]:
            assert float(r["cost"]) > np.interp(n, n0, c0)
    assert json.loads(out)["fit"]["n_points"] >= 3


def test_scaling_literal_range_reports_failure(tmp_path, capsys):
    code, out, err = run(capsys, "scaling", "--grid", "1e-3:10:60:log", "--csv", str(tmp_path / "s.csv"))
    doc = json.loads(out)
    assert code == 1
    assert doc["fit"] is None and "fit_error" in doc
    assert doc["max_energy"] < 10


def test_bessel_check(capsys):
    code, out, _ = run(capsys, "bessel-check", "--mu", "0.1")
    assert code == 0 and json.loads(out)["max_deviation"] <= 1e-6
    code, out, err = run(capsys, "bessel-check", "--mu", "1.0", "--dmax", "1")
    assert code == 0 and "warning" in err and "warning" in json.loads(out)
    assert run(capsys, "bessel-check", "--mu", "-1")[0] == 2


@pytest.fixture
def optimal_state(tmp_path, capsys):
    path = tmp_path / "opt.json"
    assert run(capsys, "state", "gen", "--mu", "0.5", "--state-out", str(path))[0] == 0
    return path


def test_state_gen_is_lab_frame(optimal_state):
    doc = json.loads(optimal_state.read_text())
    # the rotated-back optimum is not confined to n = 0
    assert any(row["n"] > 0 for row in doc["amplitudes"])


def test_simulate_reproducible(optimal_state, tmp_path, capsys):
    args = ["simulate", "--state", str(optimal_state), "--theta", "0.3", "--samples", "100000"]
    code, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    assert code == 0 and out1 == out2
    doc = json.loads(out1)
    for key in ("theta", "count", "seed", "circular_mean", "mean_cost", "cost_stderr", "delta_psi_hat"):
        assert key in doc
    assert doc["seed"] == 0 and doc["count"] == 100000
    assert abs(doc["mean_cost"] - doc["analytic_cost"]) <= 3 * doc["cost_stderr"]
    csv_path = tmp_path / "raw.csv"
    run(capsys, *args, "--samples", "10", "--samples-csv", str(csv_path))
    assert len(csv_path.read_text().splitlines()) == 11


def test_simulate_bad_state(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "simulate", "--state", str(bad))[0] == 2
    bad.write_text(json.dumps({"n_max": 0, "d_max": 0, "amplitudes": [{"n": 0, "d": 0, "re": 3}]}))
    assert run(capsys, "simulate", "--state", str(bad))[0] == 2
    assert run(capsys, "simulate", "--state", str(tmp_path / "missing.json"))[0] == 2


def test_evolve_vacuum(tmp_path, capsys):
    st = tmp_path / "vac.json"
    dump_state(TwoModeState({(0, 0): 1.0}, 0, 0), str(st))
    csv_path = tmp_path / "e.csv"
    code, out, _ = run(capsys, "evolve", "--state", str(st), "--psi", "2.2", "--csv", str(csv_path))
    assert code == 0 and json.loads(out)["max_discrepancy"] <= 1e-14
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["phi", "density", "density_full"]
    assert all(float(r[1]) == pytest.approx(1 / (2 * math.pi)) for r in rows[1:])


def test_evolve_random_state(tmp_path, capsys):
    st = tmp_path / "r.json"
    dump_state(random_state(np.random.default_rng(8), 1, 2), str(st))
    code, out, _ = run(capsys, "evolve", "--state", str(st), "--psi", "0.9", "--grid", "512",
                       "--csv", str(tmp_path / "e.csv"))
    assert code == 0 and json.loads(out)["max_discrepancy"] <= 1e-10
