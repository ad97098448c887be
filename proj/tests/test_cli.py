"""End-to-end CLI checks: exit codes, JSON fields, deterministic outputs."""

import json
import os
import subprocess
import tempfile
from pathlib import Path

import pytest

BIN = os.environ["SPINLAB_BIN"]
CONFIGS = Path(os.environ["SPINLAB_CONFIG_DIR"])


def run(*args, **kwargs):
    return subprocess.run([BIN, *args], capture_output=True, text=True, **kwargs)


def test_free_energy_gaussian_sigma0():
    res = run("free-energy", "--config", str(CONFIGS / "gaussian.toml"), "--sigma", "0")
    assert res.returncode == 0, res.stderr
    report = json.loads(res.stdout)
    assert abs(report["a_gce"] - 0.9189385) < 1e-6
    assert set(report) == {
        "sigma", "m", "a_gce", "a_gce_d1", "a_gce_d2", "a_ce", "a_ce_d1", "a_ce_d2",
        "h_K", "h_K_d2", "h_bar", "h_bar_d1", "h_bar_d2", "g0",
    }


def test_free_energy_solves_sigma_from_m():
    res = run("free-energy", "--config", str(CONFIGS / "gaussian.toml"), "--m", "1")
    assert res.returncode == 0, res.stderr
    report = json.loads(res.stdout)
    assert abs(report["sigma"] - 1.0) < 1e-8


def test_missing_config_is_exit_1():
    res = run("free-energy", "--config", "/nonexistent.toml", "--sigma", "0")
    assert res.returncode == 1
    assert res.stderr.strip()


def test_equivalence_needs_four_K():
    with tempfile.TemporaryDirectory() as tmp:
        res = run("equivalence", "--config", str(CONFIGS / "gaussian.toml"),
                  "--K-list", "8", "--out", tmp)
        assert res.returncode == 1
        assert ">= 4 K values" in res.stderr


def test_equivalence_gaussian_slope():
    with tempfile.TemporaryDirectory() as tmp:
        res = run("equivalence", "--config", str(CONFIGS / "gaussian.toml"),
                  "--K-list", "8,16,32,64", "--sigma-window", "-1,1,3",
                  "--grid-n", "64", "--out", tmp)
        assert res.returncode == 0, res.stderr
        lines = (Path(tmp) / "c0.csv").read_text().splitlines()
        assert lines[0] == "K_list,sup_diff,slope,intercept,r_squared,quantity_tag"
        slope = float(lines[1].split(",")[2])
        assert abs(slope + 1.0) < 1e-3
        manifest = json.loads((Path(tmp) / "manifest.json").read_text())
        assert manifest["outputs"] == ["c0.csv", "c1.csv", "c2.csv"]
        assert "config_digest" in manifest


def test_correlations_degenerate_is_exit_3():
    with tempfile.TemporaryDirectory() as tmp:
        res = run("correlations", "--config", str(CONFIGS / "gaussian.toml"),
                  "--max-distance", "6", "--grid-n", "64", "--out", tmp)
        assert res.returncode == 3


def test_chi_zero_row():
    with tempfile.TemporaryDirectory() as tmp:
        res = run("chi", "--config", str(CONFIGS / "gaussian.toml"), "--sigma", "0",
                  "--xi-max", "2", "--grid-n", "64", "--out", tmp)
        assert res.returncode == 0, res.stderr
        lines = (Path(tmp) / "chi.csv").read_text().splitlines()
        assert lines[0] == "xi,re_phi,im_phi"
        assert lines[1] == "0,1,0"


def test_sample_seeded_determinism():
    with tempfile.TemporaryDirectory() as d1, tempfile.TemporaryDirectory() as d2:
        args = ("sample", "--config", str(CONFIGS / "cosine.toml"), "--steps", "20000",
                "--burn-in", "1000", "--seed", "42", "--traj", "traj.csv",
                "--thin", "500")
        r1 = run(*args, "--out", d1)
        r2 = run(*args, "--out", d2)
        assert r1.returncode == 0, r1.stderr
        assert r1.stdout == r2.stdout
        assert (Path(d1) / "traj.csv").read_text() == (Path(d2) / "traj.csv").read_text()
        stats = json.loads(r1.stdout)
        assert 0.0 < stats["acceptance_rate"] < 1.0


def test_sample_kawasaki_conserves_mean():
    res = run("sample", "--config", str(CONFIGS / "cosine.toml"), "--ensemble",
              "kawasaki", "--m", "0.25", "--steps", "50000", "--burn-in", "1000",
              "--seed", "9")
    assert res.returncode == 0, res.stderr
    stats = json.loads(res.stdout)
    assert stats["max_mean_drift"] <= 1e-12


def test_convexity_writes_typed_csv():
    with tempfile.TemporaryDirectory() as tmp:
        res = run("convexity", "--config", str(CONFIGS / "cosine.toml"), "--K-list", "8",
                  "--m-window", "-1,1,3", "--grid-n", "64", "--out", tmp)
        assert res.returncode == 0, res.stderr
        lines = (Path(tmp) / "convexity_K8.csv").read_text().splitlines()
        assert lines[0] == "m_grid,h_bar_d2,h_K_d2,K,lower,upper"
        assert len(lines) == 4
