import json

import pytest

from trljsym.cli import main


def run(args):
    return main([str(a) for a in args])


class TestGen:
    def test_random_matrices(self, tmp_path, capsys):
        code = run(["gen", "--matrix", "random", "--n-half", "8",
                    "--seeds", "2", "--out", tmp_path])
        assert code == 0
        assert (tmp_path / "random_n16_seed0.mtx").exists()
        assert (tmp_path / "random_n16_seed1.mtx").exists()
        meta = json.loads((tmp_path / "random_n16_seed0.mtx.json").read_text())
        assert meta["j_realization"] == "canonical-block"

    def test_tek_matrix(self, tmp_path):
        code = run(["gen", "--matrix", "tek", "--d", "5", "--out", tmp_path])
        assert code == 0
        meta = json.loads((tmp_path / "tek_dim20_seed0.mtx.json").read_text())
        assert meta["j_realization"] == "spin-tensor"
        assert meta["kappa"] == 0.19


class TestSolve:
    def test_random_solve(self, tmp_path):
        code = run(["solve", "--matrix", "random", "--n-half", "20",
                    "--nev", "3", "--mwin", "6", "--m", "15",
                    "--tol", "1e-12", "--out", tmp_path])
        assert code == 0
        assert (tmp_path / "jsym_seed0.csv").exists()

    def test_solve_from_file(self, tmp_path):
        gen_dir = tmp_path / "gen"
        assert run(["gen", "--matrix", "random", "--n-half", "20",
                    "--out", gen_dir]) == 0
        path = gen_dir / "random_n40_seed0.mtx"
        code = run(["solve", "--matrix", f"file:{path}", "--nev", "3",
                    "--mwin", "6", "--m", "15", "--tol", "1e-12",
                    "--out", tmp_path / "solve"])
        assert code == 0

    def test_standard_algo(self, tmp_path):
        code = run(["solve", "--matrix", "random", "--n-half", "20",
                    "--algo", "standard", "--nev", "6", "--mwin", "12",
                    "--m", "20", "--tol", "1e-12", "--out", tmp_path])
        assert code == 0
        assert (tmp_path / "standard_seed0.csv").exists()


class TestCompare:
    def args(self, out):
        return ["compare", "--matrix", "random", "--n-half", "20",
                "--nev", "2", "--mwin", "5", "--m", "12",
                "--tol", "1e-12", "--seeds", "2", "--out", out]

    def test_compare_runs_both(self, tmp_path):
        code = run(self.args(tmp_path))
        assert code == 0
        for seed in (0, 1):
            assert (tmp_path / f"jsym_seed{seed}.csv").exists()
            assert (tmp_path / f"standard_seed{seed}.csv").exists()
        assert (tmp_path / "summary.csv").exists()

    def test_byte_identical_on_rerun(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(self.args(a)) == 0
        assert run(self.args(b)) == 0
        for f in sorted(a.glob("*.csv")):
            assert f.read_bytes() == (b / f.name).read_bytes()


class TestVerify:
    def test_verify_passes(self, tmp_path, capsys):
        code = run(["verify", "--matrix", "random", "--n-half", "20",
                    "--nev", "3", "--mwin", "6", "--m", "15",
                    "--tol", "1e-12", "--out", tmp_path])
        assert code == 0
        out = capsys.readouterr().out
        assert "verdict: pass" in out

    def test_verify_invert_smallest(self, tmp_path, capsys):
        code = run(["verify", "--matrix", "random", "--n-half", "20",
                    "--mode", "invert", "--nev", "3", "--mwin", "6",
                    "--m", "15", "--tol", "1e-12", "--out", tmp_path])
        assert code == 0
        assert "verdict: pass" in capsys.readouterr().out


class TestConfigFile:
    def test_manifest_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("matrix=random\nn_half=20\nnev=3\nmwin=6\nm=15\n"
                       f"tol=1e-12\nout={tmp_path / 'out'}\n")
        code = run(["solve", "--config", cfg])
        assert code == 0
        assert (tmp_path / "out" / "jsym_seed0.csv").exists()

    def test_flags_override_manifest(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("matrix=random\nn_half=20\nnev=2\nmwin=6\nm=15\n"
                       f"tol=1e-12\nout={tmp_path / 'out_a'}\n")
        code = run(["solve", "--config", cfg, "--out", tmp_path / "out_b"])
        assert code == 0
        assert not (tmp_path / "out_a").exists()
        assert (tmp_path / "out_b" / "jsym_seed0.csv").exists()

    def test_unknown_key_errors(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("frobnicate=1\n")
        assert run(["solve", "--config", cfg]) == 2


class TestErrors:
    def test_unknown_matrix_source(self, tmp_path):
        with pytest.raises(SystemExit):
            run(["solve", "--matrix", "nonsense", "--out", tmp_path])

    def test_missing_file_is_failed_run(self, tmp_path, capsys):
        code = run(["solve", "--matrix", f"file:{tmp_path}/nope.mtx",
                    "--nev", "2", "--mwin", "4", "--m", "8",
                    "--out", tmp_path])
        assert code == 1
        assert "matrix build FAILED" in capsys.readouterr().out
