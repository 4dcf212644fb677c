import json

import numpy as np
import pytest

from fidlab import cli


def run_cli(args):
    return cli.main(args)


class TestRun:
    def test_flags_only(self, tmp_path, capsys):
        out = tmp_path / "run.csv"
        code = run_cli(["run", "--system", "kicked_top", "--j", "3.5",
                        "--k", "12", "--delta", "0.2", "--n-max", "6",
                        "--estimators", "exact,mc", "--mc-samples", "20",
                        "--seed", "1", "--output", str(out)])
        assert code == 0
        assert out.exists()
        assert (tmp_path / "run.json").exists()
        assert "wrote" in capsys.readouterr().out

    def test_config_file_with_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "system": {"kind": "kicked_top", "j": 3.5, "k": 12.0},
            "perturbation": {"delta": 0.1, "generator": "register_z"},
            "n_max": 5,
            "estimators": ["exact"],
            "seed": 2,
            "output": str(tmp_path / "a.csv"),
        }))
        assert run_cli(["run", "--config", str(cfg_path)]) == 0
        assert run_cli(["run", "--config", str(cfg_path), "--delta", "0.3",
                        "--output", str(tmp_path / "b.csv")]) == 0
        a = (tmp_path / "a.csv").read_text().splitlines()[2]
        b = (tmp_path / "b.csv").read_text().splitlines()[2]
        assert a != b

    def test_missing_output_is_config_error(self):
        assert run_cli(["run", "--n-max", "3"]) == cli.EXIT_CONFIG

    def test_bad_estimator_is_config_error(self, tmp_path):
        code = run_cli(["run", "--estimators", "psychic",
                        "--output", str(tmp_path / "x.csv")])
        assert code == cli.EXIT_CONFIG

    def test_non_power_of_two_register_is_config_error(self, tmp_path):
        code = run_cli(["run", "--j", "1", "--k", "1", "--n-max", "2",
                        "--output", str(tmp_path / "x.csv")])
        assert code == cli.EXIT_CONFIG

    def test_byte_identical_outputs(self, tmp_path):
        args = ["run", "--j", "1.5", "--k", "12", "--delta", "0.2",
                "--n-max", "5", "--estimators", "exact,mc,dqc1",
                "--mc-samples", "25", "--gamma", "0.5", "--shots", "500",
                "--seed", "9"]
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert run_cli(args + ["--output", str(out1)]) == 0
        assert run_cli(args + ["--output", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestFit:
    def test_fit_from_csv(self, tmp_path, capsys):
        out = tmp_path / "decay.csv"
        assert run_cli(["run", "--j", "31.5", "--k", "12", "--delta", "0.1",
                        "--n-max", "60", "--estimators", "exact",
                        "--output", str(out)]) == 0
        capsys.readouterr()
        code = run_cli(["fit", "--input", str(out), "--window", "5", "50"])
        assert code == 0
        fit = json.loads(capsys.readouterr().out)
        assert 0.0 < fit["gamma"] < 0.1

    def test_saturation_background_keyword(self, tmp_path, capsys):
        out = tmp_path / "decay.csv"
        run_cli(["run", "--j", "31.5", "--k", "12", "--delta", "0.1",
                 "--n-max", "60", "--estimators", "exact",
                 "--output", str(out)])
        capsys.readouterr()
        code = run_cli(["fit", "--input", str(out),
                        "--background", "saturation"])
        assert code == 0
        fit = json.loads(capsys.readouterr().out)
        assert fit["background"] == pytest.approx(3 * 65 / 4160)

    def test_missing_file_is_config_error(self, tmp_path):
        assert run_cli(["fit", "--input", str(tmp_path / "nope.csv")]) \
            == cli.EXIT_CONFIG


class TestVerifyTheorem:
    def test_passes(self, capsys):
        code = run_cli(["verify-theorem", "--ell", "2", "--dim", "3",
                        "--trials", "2", "--samples", "20000", "--seed", "0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_resource_guard_exit_code(self):
        # 64^4 exceeds the symmetrizer dimension cap
        code = run_cli(["verify-theorem", "--ell", "4", "--dim", "64",
                        "--trials", "1", "--samples", "100"])
        assert code == cli.EXIT_RESOURCE

    def test_bad_order_is_config_error(self):
        code = run_cli(["verify-theorem", "--ell", "7", "--dim", "2",
                        "--trials", "1", "--samples", "100"])
        assert code == cli.EXIT_CONFIG


class TestSeparability:
    def test_kicked_top_certificate(self, capsys):
        code = run_cli(["separability", "--j", "3.5", "--k", "12",
                        "--delta", "0.3", "--n-max", "5"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 6
        assert "decoherence_factor" in out

    def test_random_unitary_certificate(self):
        code = run_cli(["separability", "--system", "random_unitary",
                        "--dim", "8", "--system-seed", "4", "--delta", "0.2",
                        "--generator", "register_z", "--n-max", "3"])
        assert code == 0
