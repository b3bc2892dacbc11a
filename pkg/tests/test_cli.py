"""End-to-end command-line runs, in process via main(argv)."""

import json
import math

import numpy as np
import pytest

from blockframe import ConvergenceError, __version__, read_bfm, sha256_file, solve_threshold, write_bfm
from blockframe.cli import main


def test_version_flag():
    with pytest.raises(SystemExit) as ex:
        main(["--version"])
    assert ex.value.code == 0


# ---------------------------------------------------------------- construct / analyze


def test_construct_and_analyze_agree(tmp_path):
    cdir = tmp_path / "c"
    adir = tmp_path / "a"
    rc = main(["construct", "--family", "id-hadamard", "--k", "2", "--out-dir", str(cdir)])
    assert rc == 0
    rc = main(["analyze", str(cdir / "frame.bfm"), "--out-dir", str(adir)])
    assert rc == 0
    assert (cdir / "report.json").read_bytes() == (adir / "report.json").read_bytes()
    assert (adir / "gram.csv").exists()
    assert (adir / "analyze-manifest.json").exists()


def test_construct_manifest_contents(tmp_path):
    out = tmp_path / "run"
    assert main(["construct", "--family", "id-hadamard", "--k", "2", "--out-dir", str(out)]) == 0
    man = json.loads((out / "construct-manifest.json").read_text())
    assert man["command"] == "construct"
    assert man["params"]["family"] == "id-hadamard"
    assert man["params"]["k"] == 2
    assert man["seed"] == 0
    assert man["version"] == __version__
    assert man["duration_s"] >= 0.0
    for path, digest in man["outputs"].items():
        assert sha256_file(path) == digest
    assert len(man["outputs"]) == 2


def test_construct_replay_byte_identity(tmp_path):
    d1, d2 = tmp_path / "one", tmp_path / "two"
    for d in (d1, d2):
        assert main(
            ["construct", "--family", "steiner", "--v", "4", "--kron", "hadamard:1", "--out-dir", str(d)]
        ) == 0
    assert (d1 / "frame.bfm").read_bytes() == (d2 / "frame.bfm").read_bytes()
    assert (d1 / "report.json").read_bytes() == (d2 / "report.json").read_bytes()


def test_construct_report_values(tmp_path):
    out = tmp_path / "st"
    assert main(
        ["construct", "--family", "steiner", "--v", "4", "--kron", "hadamard:1", "--out-dir", str(out)]
    ) == 0
    payload = json.loads((out / "report.json").read_text())
    assert (payload["n"], payload["r"], payload["m"]) == (12, 2, 16)
    assert payload["worst_case_coherence"] == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert payload["validation"]["equi_isoclinic"] is True
    assert payload["validation"]["block_orthonormal"] is True


def test_bfm_write_read_write_identical(tmp_path):
    out = tmp_path / "f"
    assert main(["construct", "--family", "id-hadamard", "--k", "2", "--out-dir", str(out)]) == 0
    src = out / "frame.bfm"
    frame = read_bfm(str(src))
    copy = out / "copy.bfm"
    write_bfm(str(copy), frame)
    assert src.read_bytes() == copy.read_bytes()


def test_construct_missing_param(tmp_path):
    rc = main(["construct", "--family", "steiner", "--out-dir", str(tmp_path)])
    assert rc == 2


def test_construct_bad_kron(tmp_path):
    rc = main(
        ["construct", "--family", "steiner", "--v", "4", "--kron", "fourier:2", "--out-dir", str(tmp_path)]
    )
    assert rc == 2


def test_analyze_malformed_file(tmp_path):
    bad = tmp_path / "bad.bfm"
    bad.write_text("not a frame\n")
    assert main(["analyze", str(bad), "--out-dir", str(tmp_path)]) == 2


# ---------------------------------------------------------------- bounds


def test_bounds_stdout(capsys):
    assert main(["bounds", "--n", "12", "--r", "2", "--m", "16"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["welch_block_lower"] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert payload["etf_max_blocks"] == 36
    assert payload["max_equiisoclinic"] == 141
    assert payload["orthobases_lower"] == pytest.approx(math.sqrt(2.0 / 12.0), abs=1e-12)


def test_bounds_skips_divisibility_rows(capsys):
    assert main(["bounds", "--n", "9", "--r", "2", "--m", "6"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert "etf_max_blocks" not in payload
    assert "orthobases_lower" not in payload


def test_bounds_invalid_regime():
    assert main(["bounds", "--n", "4", "--r", "5", "--m", "8"]) == 2


def test_bounds_out_dir(tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["bounds", "--n", "12", "--r", "2", "--m", "16", "--out-dir", str(out)]) == 0
    stdout_payload = json.loads(capsys.readouterr().out)
    file_payload = json.loads((out / "bounds.json").read_text())
    assert file_payload == stdout_payload
    assert (out / "bounds-manifest.json").exists()


# ---------------------------------------------------------------- threshold


def test_threshold_single_beta(capsys):
    assert main(["threshold", "--beta", "0.25"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "beta,multiplier,residual"
    beta, mult, resid = (float(tok) for tok in lines[1].split(","))
    sol = solve_threshold(0.25)
    assert beta == 0.25
    assert mult == sol.multiplier  # repr floats round-trip exactly
    assert abs(resid) < 1e-10


def test_threshold_grid_csv(tmp_path):
    out = tmp_path / "t"
    assert main(["threshold", "--grid", "0.1:0.4:4", "--out-dir", str(out)]) == 0
    lines = (out / "threshold.csv").read_text().strip().splitlines()
    assert lines[0] == "beta,multiplier,residual"
    rows = [[float(tok) for tok in line.split(",")] for line in lines[1:]]
    assert [r[0] for r in rows] == pytest.approx(list(np.linspace(0.1, 0.4, 4)))
    mults = [r[1] for r in rows]
    assert all(a > b for a, b in zip(mults, mults[1:]))
    assert all(abs(r[2]) < 1e-10 for r in rows)


def test_threshold_grid_json(tmp_path):
    out = tmp_path / "tj"
    assert main(
        ["threshold", "--grid", "0.1:0.3:3", "--format", "json", "--out-dir", str(out)]
    ) == 0
    rows = json.loads((out / "threshold.json").read_text())
    assert len(rows) == 3
    assert rows[0]["multiplier"] == solve_threshold(0.1).multiplier


def test_threshold_errors():
    assert main(["threshold", "--beta", "0.6"]) == 2
    assert main(["threshold"]) == 2
    assert main(["threshold", "--grid", "0.1:0.4"]) == 2
    assert main(["threshold", "--grid", "0.4:0.1:5"]) == 2


def test_threshold_convergence_exit(monkeypatch):
    def boom(beta):
        raise ConvergenceError("bisection stalled")

    monkeypatch.setattr("blockframe.cli.solve_threshold", boom)
    assert main(["threshold", "--beta", "0.25"]) == 3


# ---------------------------------------------------------------- random-mu


def test_random_mu_curve_file(tmp_path):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    args = ["random-mu", "--n", "16", "--r-grid", "2,3", "--trials", "3", "--seed", "7"]
    assert main(args + ["--threads", "1", "--out-dir", str(d1)]) == 0
    assert main(args + ["--threads", "3", "--out-dir", str(d2)]) == 0
    body = (d1 / "curve.csv").read_text()
    assert body == (d2 / "curve.csv").read_text()  # thread count never changes output
    lines = body.strip().splitlines()
    assert lines[0] == "beta,mean_mu,max_mu,theory_mu"
    assert len(lines) == 3
    for line in lines[1:]:
        beta, mean_mu, max_mu, theory = (float(t) for t in line.split(","))
        assert 0.0 < mean_mu <= max_mu <= 1.0


def test_random_mu_env_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("BLOCKFRAME_THREADS", "zzz")
    args = ["random-mu", "--n", "16", "--r-grid", "2", "--trials", "2", "--out-dir", str(tmp_path)]
    assert main(args) == 2
    monkeypatch.setenv("BLOCKFRAME_THREADS", "2")
    assert main(args) == 0


# ---------------------------------------------------------------- flip


def test_flip_command(tmp_path):
    cdir = tmp_path / "c"
    fdir = tmp_path / "f"
    assert main(["construct", "--family", "id-hadamard", "--k", "2", "--out-dir", str(cdir)]) == 0
    assert main(["flip", str(cdir / "frame.bfm"), "--out-dir", str(fdir)]) == 0
    info = json.loads((fdir / "flip.json").read_text())
    assert info["mu_after"] == info["mu_before"]
    assert info["norm_variant"] == "spectral"
    assert len(info["signs"]) == 8
    flipped = read_bfm(str(fdir / "flipped.bfm"))
    assert (flipped.n, flipped.r, flipped.m) == (4, 1, 8)


def test_flip_table_command(tmp_path):
    out = tmp_path / "ft"
    assert main(
        [
            "flip-table",
            "--n", "16", "--m", "24", "--r-list", "1,2",
            "--realizations", "2", "--out-dir", str(out),
        ]
    ) == 0
    lines = (out / "flip_table.csv").read_text().strip().splitlines()
    assert lines[0] == "r,nu_before_mean,nu_after_mean,improvement_pct,nu_bound"
    assert len(lines) == 3
    for line in lines[1:]:
        vals = [float(t) for t in line.split(",")]
        assert vals[2] < vals[1]  # flipped mean below the unflipped mean


# ---------------------------------------------------------------- cs


def test_cs_command(tmp_path):
    cdir = tmp_path / "c"
    out = tmp_path / "cs"
    assert main(["construct", "--family", "id-hadamard", "--k", "2", "--out-dir", str(cdir)]) == 0
    rc = main(
        [
            "cs",
            "--frame", f"det={cdir / 'frame.bfm'}",
            "--random", "rnd=4,1,8",
            "--k-grid", "1,2",
            "--trials", "4",
            "--out-dir", str(out),
        ]
    )
    assert rc == 0
    lines = (out / "ndp.csv").read_text().strip().splitlines()
    assert lines[0] == "label,k,dynamic_range,mean_ndp,stderr,trials"
    assert len(lines) == 5  # 2 frames x 2 sparsities
    for line in lines[1:]:
        toks = line.split(",")
        assert toks[0] in ("det", "rnd")
        assert 0.0 <= float(toks[3]) <= 1.0
    man = json.loads((out / "cs-manifest.json").read_text())
    assert man["params"]["frames"] == ["det", "rnd"]


def test_cs_requires_frames(tmp_path):
    assert main(["cs", "--k-grid", "1", "--out-dir", str(tmp_path)]) == 2


def test_cs_bad_frame_argument(tmp_path):
    assert main(["cs", "--frame", "nopath", "--k-grid", "1", "--out-dir", str(tmp_path)]) == 2
