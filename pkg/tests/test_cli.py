import json

import pytest

from sparselab.cli import main, parse_config


def test_diagnose_reports_effective_covariates(capsys):
    assert main(["diagnose", "--scenario", "S2", "--rho", "0.9", "--s", "15", "--n", "100"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["effective_covariates_95"] == 10
    assert doc["irrepresentable_holds"] is True


def test_s3a_rejects_other_sparsity(capsys):
    assert main(["diagnose", "--scenario", "S3a", "--rho", "0.5", "--s", "20", "--n", "50"]) == 2
    assert "s = 15" in capsys.readouterr().err


def test_s3b_accepts_its_own_sparsity():
    cfg = parse_config(["diagnose", "--scenario", "S3b", "--rho", "0.5", "--s", "10", "--n", "50"])
    assert cfg["s"] == 10


def test_invalid_method_lists_valid_ones(tmp_path, capsys):
    code = main(["bench", "--scenario", "S1", "--s", "10", "--n", "30", "--methods", "lasso,foo",
                 "--m", "1", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2
    assert "foo" in err and "lasso, adapl, scad, dant, relaxl, sqrtl, scall, dcvs" in err


def test_config_file_unknown_key_is_an_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "S1", "n": 50, "s": 10, "sead": 3}))
    assert main(["diagnose", "--config", str(cfg)]) == 2
    assert "sead" in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "S1", "n": 50, "s": 10}))
    resolved = parse_config(["diagnose", "--config", str(cfg), "--n", "80"])
    assert resolved["n"] == 80 and resolved["s"] == 10


def test_seed_range_is_checked(tmp_path):
    assert main(["simulate", "--scenario", "S1", "--s", "10", "--n", "20", "--seed", "-1",
                 "--out", str(tmp_path / "d.csv")]) == 2
    assert main(["simulate", "--scenario", "S1", "--s", "10", "--n", "20",
                 "--seed", str(2 ** 64), "--out", str(tmp_path / "d.csv")]) == 2


def test_simulate_writes_sidecar_and_default_seed(tmp_path):
    out = tmp_path / "data.csv"
    assert main(["simulate", "--scenario", "S2", "--rho", "0.9", "--n", "30", "--s", "15",
                 "--out", str(out)]) == 0
    side = json.loads((tmp_path / "data.json").read_text())
    assert side["support"] == list(range(1, 16))
    # five blocks hold a pair (1 + 1 + 2 * 0.9) and five hold a single covariate
    assert side["sigma2"] == pytest.approx((5 * 3.8 + 5) / 9)
    assert len(side["beta"]) == 100
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    assert manifest["config"]["seed"] == 0
    assert sorted(manifest["outputs"]) == ["data.csv", "data.json"]
    rows = out.read_text().splitlines()
    assert len(rows) == 31 and rows[0].split(",")[-1] == "y"


def test_fit_round_trip(tmp_path, capsys):
    out = tmp_path / "data.csv"
    main(["simulate", "--scenario", "S1", "--s", "10", "--n", "200", "--seed", "3",
          "--out", str(out)])
    capsys.readouterr()
    assert main(["fit", "--data", str(out), "--method", "lasso"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {f"x{j}" for j in range(1, 11)} <= set(doc["selected"])


def test_penalty_curves(tmp_path):
    out = tmp_path / "curves.tsv"
    assert main(["penalty-curves", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].split("\t") == ["beta", "ridge", "lasso", "scad", "enet_0.7", "l0.5"]
    assert len(rows) == 602


def test_bench_repeated_runs_are_byte_identical(tmp_path, monkeypatch):
    args = ["bench", "--scenario", "S3b", "--rho", "0.5", "--n", "30,40", "--methods",
            "lasso,scad", "--m", "1", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("SPARSELAB_THREADS", "2")
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert "summary.csv" in names and "run-manifest.json" in names
    # the manifest records its own output directory; everything else must match
    for name in (n for n in names if n != "run-manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_reproduces_outputs(tmp_path):
    out = tmp_path / "a"
    main(["bench", "--scenario", "S1", "--s", "10", "--n", "30", "--methods", "lasso",
          "--m", "2", "--seed", "11", "--out", str(out)])
    cfg = json.loads((out / "run-manifest.json").read_text())["config"]
    cfg.pop("command")
    cfg["out"] = str(tmp_path / "b")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["bench", "--config", str(path)]) == 0
    assert (out / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
