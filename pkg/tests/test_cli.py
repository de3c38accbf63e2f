import json

import pytest

from detcap.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exact_demo(capsys):
    code, out, _ = run(capsys, "exact", "--demo")
    data = json.loads(out)
    assert code == 0
    assert data["pmf"] == [0.5, 0.25]
    assert data["mass_at_infinity"] == 0.25
    assert set(data) >= {"pmf", "mass_at_infinity", "expected_truncated_time", "success_probability"}


def test_exact_from_files(tmp_path, capsys):
    (tmp_path / "s.txt").write_text("3 1 2\n")
    (tmp_path / "c.json").write_text(json.dumps({"probs": [0.2, 0.5, 0.8]}))
    code, out, _ = run(capsys, "exact", "--scheme-file", str(tmp_path / "s.txt"),
                       "--config-file", str(tmp_path / "c.json"))
    assert code == 0
    assert json.loads(out)["pmf"] == pytest.approx([0.8, 0.04, 0.08])


def test_exact_bad_index(capsys):
    code, _, err = run(capsys, "exact", "--scheme", "1,3", "--probs", "0.2,0.8")
    assert code == 2 and "detector 3" in err


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--demo", "--replicates", "20000", "--seed", "4")
    data = json.loads(out)
    assert code == 0
    assert abs(data["empirical"]["pmf"][0] - 0.5) < 0.02


def test_scheme_stats(capsys):
    code, out, _ = run(capsys, "scheme-stats", "--family", "uniform-injective", "--n", "10", "--r", "4", "--k", "2")
    data = json.loads(out)
    assert code == 0
    assert data["a_k"] == 1.0
    assert data["b_k"] == pytest.approx(8 / 10 * 7 / 9)
    code, out, _ = run(capsys, "scheme-stats", "--family", "iid-uniform", "--n", "10", "--r", "4", "--k", "2",
                       "--method", "mc", "--samples", "5000")
    assert json.loads(out)["stderr"]["a_k"] > 0


def test_ensemble_csv_and_bounds(tmp_path, capsys):
    bounds = tmp_path / "bounds.json"
    code, out, _ = run(capsys, "ensemble", "--family", "uniform-injective", "--n", "100", "1000",
                       "--replicates", "500", "--out", str(bounds))
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "n,r,mean_T,se_mean,var_T,se_var,mean_S,exact_mean_T"
    assert len(lines) == 3
    report = json.loads(bounds.read_text())
    # r = 10 leaves a visible truncation tail; r = 31 does not
    assert not report["points"][0]["mean_bounds"]["holds"]
    assert report["points"][1]["mean_bounds"]["holds"]
    assert report["constants"]["e_diagonal"]["1"] == pytest.approx(0.09)


def test_ensemble_json(capsys):
    code, out, _ = run(capsys, "ensemble", "--family", "hot-start", "--n", "50", "--r", "5",
                       "--replicates", "300", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["rows"][0]["r"] == 5
    assert data["bounds"]["points"][0]["variance_sandwich"]["holds"]


def test_infeasible_family_is_usage_error(capsys):
    code, _, err = run(capsys, "ensemble", "--family", "uniform-injective", "--n", "5", "--r", "9",
                       "--replicates", "10")
    assert code == 2 and "r <= n" in err


def test_run_missing_config(capsys):
    code, _, err = run(capsys, "run", "missing.toml")
    assert code == 2
    assert "config not found" in err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["launch"])
    assert exc.value.code == 2


def test_verify_fast(capsys):
    code, out, _ = run(capsys, "verify", "--fast")
    assert code == 0
    assert "FAIL" not in out
