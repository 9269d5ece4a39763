import json
from pathlib import Path

import pytest

from mvawgn.cli import main


def _run_dir(out: Path, command: str, index: int = 0) -> Path:
    dirs = sorted((out / command).iterdir())
    return dirs[index]


def _data_lines(run_dir: Path) -> list[str]:
    return (run_dir / "data.csv").read_text().splitlines()


def test_socr_curve_outputs(tmp_path):
    out = tmp_path / "out"
    code = main(
        [
            "socr-curve",
            "--gamma", "2", "--noise", "1",
            "--v-list", "0.5",
            "--eps-grid", "0.1,0.5",
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    run = _run_dir(out, "socr-curve")
    assert (run / "manifest.json").exists()
    assert (run / "plot.svg").exists()
    lines = _data_lines(run)
    assert lines[0] == "# schema: socr-curve-v1"
    assert lines[1] == "eps,v,socr,status"
    rows = [ln.split(",") for ln in lines[2:]]
    # v=0 baseline is always included
    assert {r[1] for r in rows} == {"0", "0.5"}
    by_v = {v: {} for v in ("0", "0.5")}
    for eps, v, socr, status in rows:
        assert status == "ok"
        by_v[v][eps] = float(socr)
    for eps in by_v["0"]:
        assert by_v["0.5"][eps] > by_v["0"][eps]


def test_socr_curve_validation_error(tmp_path):
    code = main(
        [
            "socr-curve",
            "--gamma", "2", "--noise", "1",
            "--v-list", "0.5",
            "--eps-grid", "0.0,0.5",
            "--out-dir", str(tmp_path / "out"),
        ]
    )
    assert code == 2


def test_minimizer_sweep_csv(tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "minimizer-sweep",
                "--r", "0",
                "--v-list", "0.5,1,2",
                "--out-dir", str(out),
                "--format", "csv",
            ]
        )
        == 0
    )
    run = _run_dir(out, "minimizer-sweep")
    lines = _data_lines(run)
    assert lines[1] == "v,point1,prob1,point2,prob2,point3,prob3,status"
    assert not (run / "plot.svg").exists()
    for ln in lines[2:]:
        cells = ln.split(",")
        assert cells[-1] == "converged"
        assert cells[5] == "" and cells[6] == ""  # two-point rows
        assert float(cells[2]) + float(cells[4]) == pytest.approx(1.0, abs=1e-9)


def test_verify_lemmas_csv(tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "verify-lemmas",
                "--gamma", "2", "--noise", "1",
                "--n-list", "128,512",
                "--trials", "2000",
                "--seed", "6",
                "--out-dir", str(out),
            ]
        )
        == 0
    )
    lines = _data_lines(_run_dir(out, "verify-lemmas"))
    assert lines[1] == "comparison,n,delta,eps,sup_abs_log_ratio,sup_over_log_n,samples_in_set"
    tags = {ln.split(",")[0] for ln in lines[2:]}
    assert tags == {"shell-vs-gaussian", "shell-vs-shell"}
    assert len(lines) == 2 + 4


def test_simulate_emits_both_kinds(tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "simulate",
                "--gamma", "2", "--noise", "1", "--v", "0",
                "--r", "-0.8543677103630669",
                "--n-list", "200",
                "--trials", "2000",
                "--seed", "9",
                "--out-dir", str(out),
            ]
        )
        == 0
    )
    lines = _data_lines(_run_dir(out, "simulate"))
    assert lines[1].startswith("kind,n,r,eps_target,estimate,ci_low,ci_high")
    kinds = [ln.split(",")[0] for ln in lines[2:]]
    assert kinds == ["error-functional", "rc-bound"]
    est = float(lines[2].split(",")[4])
    bound = float(lines[3].split(",")[4])
    assert bound >= est


def test_clt_check(tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "clt-check",
                "--gamma", "2", "--noise", "1",
                "--n-list", "100,400",
                "--trials", "20000",
                "--seed", "5",
                "--out-dir", str(out),
            ]
        )
        == 0
    )
    lines = _data_lines(_run_dir(out, "clt-check"))
    assert lines[1] == "n,cost,trials,ks_stat,sample_mean,sample_variance"
    ks = [float(ln.split(",")[3]) for ln in lines[2:]]
    assert ks[1] < ks[0]


def test_rerun_reproduces_csv_bytes(tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "clt-check",
                "--gamma", "2", "--noise", "1",
                "--n-list", "100,400",
                "--trials", "20000",
                "--seed", "5",
                "--out-dir", str(out),
            ]
        )
        == 0
    )
    first = _run_dir(out, "clt-check", 0)
    assert main(["rerun", str(first / "manifest.json")]) == 0
    second = _run_dir(out, "clt-check", 1)
    assert (first / "data.csv").read_bytes() == (second / "data.csv").read_bytes()


def test_rerun_rejects_bad_manifest(tmp_path):
    bad = tmp_path / "manifest.json"
    bad.write_text(json.dumps({"schema": "other", "command": "clt-check", "params": {}}))
    assert main(["rerun", str(bad)]) == 2
    assert main(["rerun", str(tmp_path / "missing.json")]) == 2


def test_grid_parsing_step_syntax(tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "minimizer-sweep",
                "--r", "0",
                "--v-list", "1:2:0.5",
                "--out-dir", str(out),
                "--format", "csv",
            ]
        )
        == 0
    )
    lines = _data_lines(_run_dir(out, "minimizer-sweep"))
    vs = [ln.split(",")[0] for ln in lines[2:]]
    assert vs == ["1", "1.5", "2"]


def test_csv_uses_12_significant_digits(tmp_path):
    out = tmp_path / "out"
    main(
        [
            "minimizer-sweep",
            "--r", "0.123456789012345",
            "--v-list", "1",
            "--out-dir", str(out),
            "--format", "csv",
        ]
    )
    lines = _data_lines(_run_dir(out, "minimizer-sweep"))
    point1 = lines[2].split(",")[1]
    digits = point1.lstrip("-0.").replace(".", "").rstrip("0")
    assert len(digits) >= 10
