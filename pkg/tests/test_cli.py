import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from kernel_koopman import SnapshotSet
from kernel_koopman.cli import main
from kernel_koopman.config import RunConfig, load_config
from kernel_koopman.errors import ConfigError
from kernel_koopman.io import load_decomposition, read_snapshots, write_snapshots

SMALL_FHN = {"n_snapshots": 60, "n_trajectories": 2}


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.json"
    # rank 15 keeps the Gramian well conditioned on this short run
    cfg.write_text(json.dumps({"fhn": SMALL_FHN, "rank": 15}))
    out = root / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    return root


@pytest.fixture(scope="module")
def fit_dir(sim_dir):
    out = sim_dir / "fit"
    argv = ["fit", str(sim_dir / "sim" / "trajectory_0.kdmd"), "--config", str(sim_dir / "run.json"), "--out", str(out)]
    assert main(argv) == 0
    return out


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.kernel == "polynomial:20" and cfg.rank == 150 and cfg.normalize
        assert cfg.policy().describe() == "rank:150"

    def test_unknown_keys(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"kernal": "linear"}))
        with pytest.raises(ConfigError):
            load_config(p)
        p.write_text(json.dumps({"fhn": {"epsilon": 0.03, "bogus": 1}}))
        with pytest.raises(ConfigError):
            load_config(p)

    @pytest.mark.parametrize(
        "bad", [{"kernel": "cubic"}, {"rank": 0}, {"select": "x"}, {"format": "hdf5"}, {"fhn": {"dt_internal": 0.3}}]
    )
    def test_invalid_values(self, bad):
        with pytest.raises(ConfigError):
            RunConfig(**bad).validate()

    def test_overrides(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"kernel": "linear", "threshold": 1e-3}))
        cfg = load_config(p, kernel="gaussian:2", out=None)
        assert cfg.kernel == "gaussian:2" and cfg.out == "out"
        assert cfg.policy().describe() == "threshold:0.001"


class TestSimulate:
    def test_files_and_manifest(self, sim_dir):
        sim = sim_dir / "sim"
        man = json.loads((sim / "manifest.json").read_text())
        assert man["files"] == ["trajectory_0.kdmd", "trajectory_1.kdmd"]
        assert man["shape"] == [59, 256] and man["seed"] == 3
        assert man["layout"] == {"type": "fhn", "n_modes": 128, "length": 20}
        S = read_snapshots(sim / "trajectory_0.kdmd")
        assert (S.M, S.N, S.dt) == (59, 256, 1)

    def test_deterministic(self, sim_dir, tmp_path):
        out = tmp_path / "again"
        assert main(["simulate", "--config", str(sim_dir / "run.json"), "--out", str(out), "--seed", "3"]) == 0
        for name in ("trajectory_0.kdmd", "trajectory_1.kdmd", "manifest.json"):
            assert (out / name).read_bytes() == (sim_dir / "sim" / name).read_bytes()

    def test_zero_variance_csv(self, tmp_path):
        cfg = tmp_path / "z.json"
        cfg.write_text(json.dumps({"fhn": {"n_snapshots": 5, "n_trajectories": 1, "forcing_std": 0.0}, "format": "csv"}))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "z")]) == 0
        X = np.loadtxt(tmp_path / "z" / "trajectory_0.x.csv", delimiter=",")
        assert np.abs(X - X[0]).max() < 1e-8


class TestFit:
    def test_outputs(self, fit_dir):
        for name in ("decomposition.json", "decomposition.npz", "eigenvalues.csv", "timing.json"):
            assert (fit_dir / name).exists()
        doc = json.loads((fit_dir / "decomposition.json").read_text())
        diag = doc["diagnostics"]
        for key in ("gram_condition", "eigvec_condition", "reconstruction_residual", "rank"):
            assert key in diag
        assert diag["rank"] == 15 and doc["meta"]["layout"]["type"] == "fhn"
        rows = read_csv(fit_dir / "eigenvalues.csv")
        assert rows[0] == ["index", "mu_re", "mu_im", "lambda_re", "lambda_im"] and len(rows) == 16
        assert "wall_time" in json.loads((fit_dir / "timing.json").read_text())

    def test_linear_kernel_matches_dmd(self, sim_dir, tmp_path):
        data = sim_dir / "sim" / "trajectory_0.kdmd"
        out = tmp_path / "dmd"
        assert main(["fit", str(data), "--kernel", "linear", "--rank", "5", "--normalize", "off", "--out", str(out)]) == 0
        D, _ = load_decomposition(out)
        S = read_snapshots(data)
        # exact DMD with states as columns: X = U S V^T, A_tilde = U_r^T Y V_r S_r^-1
        U, s, Vt = np.linalg.svd(S.X.T, full_matrices=False)
        Atil = U[:, :5].T @ S.Y.T @ Vt[:5].T / s[:5]
        ref = np.linalg.eigvals(Atil)
        for m in D.mu:
            assert np.min(np.abs(ref - m)) < 1e-8

    def test_fit_is_deterministic(self, sim_dir, fit_dir, tmp_path):
        argv = ["fit", str(sim_dir / "sim" / "trajectory_0.kdmd"), "--config", str(sim_dir / "run.json")]
        assert main(argv + ["--out", str(tmp_path / "b")]) == 0
        for name in ("decomposition.json", "decomposition.npz", "eigenvalues.csv"):
            assert (tmp_path / "b" / name).read_bytes() == (fit_dir / name).read_bytes()

    def test_malformed_file(self, tmp_path):
        bad = tmp_path / "bad.kdmd"
        bad.write_bytes(b"garbage")
        out = tmp_path / "o"
        assert main(["fit", str(bad), "--out", str(out)]) == 3
        assert not out.exists()

    def test_zero_data(self, tmp_path):
        p = tmp_path / "z.kdmd"
        write_snapshots(p, SnapshotSet(np.zeros((4, 2)), np.zeros((4, 2))))
        assert main(["fit", str(p), "--out", str(tmp_path / "o")]) == 3

    def test_numerical_failure(self, tmp_path):
        p = tmp_path / "big.kdmd"
        X = np.random.default_rng(0).normal(size=(6, 2)) * 1e30
        write_snapshots(p, SnapshotSet(X, X))
        with np.errstate(over="ignore"):
            code = main(["fit", str(p), "--normalize", "off", "--out", str(tmp_path / "o")])
        assert code == 4
        assert not (tmp_path / "o").exists()

    def test_config_error(self, tmp_path):
        assert main(["fit", "x.kdmd", "--kernel", "spline", "--out", str(tmp_path / "o")]) == 2
        assert main(["fit", "--out", str(tmp_path / "o")]) == 2

    def test_rank_and_threshold_exclusive(self):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "x.kdmd", "--rank", "3", "--threshold", "0.1"])
        assert exc.value.code == 2


class TestEval:
    def test_training_states(self, sim_dir, fit_dir, tmp_path):
        out = tmp_path / "ev"
        states = sim_dir / "sim" / "trajectory_0.kdmd"
        assert main(["eval", str(fit_dir), str(states), "--out", str(out)]) == 0
        D, _ = load_decomposition(fit_dir)
        phi = np.loadtxt(out / "eigenfunctions.csv", delimiter=",", skiprows=1)
        vals = phi[:, 0::2] + 1j * phi[:, 1::2]
        np.testing.assert_allclose(vals, D.Phi_x, atol=1e-8 * np.abs(D.Phi_x).max())
        pred = np.loadtxt(out / "predictions.csv", delimiter=",", skiprows=1)
        assert pred.shape == (59, 256)

    def test_empty_states(self, fit_dir, tmp_path):
        p = tmp_path / "none.csv"
        p.write_text("")
        assert main(["eval", str(fit_dir), str(p), "--out", str(tmp_path / "ev")]) == 0
        assert len(read_csv(tmp_path / "ev" / "eigenfunctions.csv")) == 1
        assert len(read_csv(tmp_path / "ev" / "predictions.csv")) == 1

    def test_dimension_mismatch(self, fit_dir, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("1,2,3\n")
        assert main(["eval", str(fit_dir), str(p), "--out", str(tmp_path / "ev")]) == 3


class TestCompare:
    def test_identical(self, fit_dir, tmp_path, capsys):
        assert main(["compare", str(fit_dir), str(fit_dir), "--tol", "1e-12", "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "compare.json").read_text())
        assert summary["unmatched_a"] == summary["unmatched_b"] == 0
        assert summary["max_distance"] == 0.0
        assert "matched" in capsys.readouterr().out

    def test_disjoint(self, sim_dir, fit_dir, tmp_path):
        other = tmp_path / "scalar"
        p = tmp_path / "s.kdmd"
        write_snapshots(p, SnapshotSet([3.0, 9.0, 27.0], [9.0, 27.0, 81.0]))
        assert main(["fit", str(p), "--kernel", "linear", "--normalize", "off", "--out", str(other)]) == 0
        assert main(["compare", str(fit_dir), str(other), "--tol", "1e-6", "--out", str(tmp_path / "c")]) == 0
        summary = json.loads((tmp_path / "c" / "compare.json").read_text())
        assert summary["matched"] == 0 and summary["unmatched_b"] == 1


class TestExportPlots:
    def test_fhn_layout(self, fit_dir, tmp_path):
        out = tmp_path / "plots"
        assert main(["export-plots", str(fit_dir), "--top", "3", "--out", str(out)]) == 0
        scatter = read_csv(out / "eigenvalues_scatter.csv")
        assert scatter[0] == ["index", "lambda_re", "lambda_im"]
        sel = read_csv(out / "selected.csv")
        assert len(sel) == 4
        for part in ("v", "w"):
            rows = read_csv(out / f"modes_{part}.csv")
            assert rows[0] == ["mode", "index", "x", "re", "im"] and len(rows) == 1 + 3 * 128
            assert float(rows[1][2]) == pytest.approx(20 / 256)

    def test_empty_selection(self, fit_dir, tmp_path):
        out = tmp_path / "plots"
        assert main(["export-plots", str(fit_dir), "--top", "0", "--out", str(out)]) == 0
        assert len(read_csv(out / "selected.csv")) == 1
        assert len(read_csv(out / "modes_v.csv")) == 1

    def test_generic_layout(self, tmp_path):
        p = tmp_path / "s.kdmd"
        X = np.random.default_rng(0).normal(size=(10, 2))
        write_snapshots(p, SnapshotSet(X, X @ np.diag([0.9, 0.5]), dt=1.0))
        assert main(["fit", str(p), "--kernel", "linear", "--threshold", "1e-6", "--out", str(tmp_path / "f")]) == 0
        assert main(["export-plots", str(tmp_path / "f"), "--out", str(tmp_path / "p")]) == 0
        rows = read_csv(tmp_path / "p" / "modes.csv")
        assert len(rows) == 1 + 2 * 2


@pytest.mark.skipif(shutil.which("kernel-koopman") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["kernel-koopman", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.1.0"
    res = subprocess.run(["kernel-koopman", "fit", str(tmp_path / "missing.kdmd"), "--out", str(tmp_path / "o")],
                         capture_output=True, text=True)
    assert res.returncode == 3 and "data error" in res.stderr
