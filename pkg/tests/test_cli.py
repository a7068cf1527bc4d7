"""CLI: config resolution, report formats, determinism, exit codes."""

import json

import pytest

from qfisher.cli import (
    EXIT_NUMERICAL,
    EXIT_PASS,
    EXIT_USAGE,
    main,
    read_config_file,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestInfo:
    def test_uniform_unit_interval_s2_zero(self, capsys):
        code, out, _ = run_cli(capsys, "info", "--family", "uniform",
                               "--lo", "0", "--hi", "1", "--q", "2")
        assert code == EXIT_PASS
        d = json.loads(out)
        assert d["S_q"] == 0.0
        assert d["M_q"] == pytest.approx(1.0)
        assert d["divergence_flag"] is False
        assert d["config"]["family"] == "uniform"

    def test_qgaussian_fields(self, capsys):
        code, out, _ = run_cli(capsys, "info", "--family", "qgaussian",
                               "--q", "2", "--alpha", "2", "--gamma", "1")
        assert code == EXIT_PASS
        d = json.loads(out)
        for key in ("M_q", "S_q", "H_q", "N_q", "phi", "I", "divergence_flag"):
            assert key in d
        assert d["I"] == pytest.approx(1.25, abs=1e-4)


class TestDeterminism:
    def test_qcr_byte_identical(self, capsys):
        a = run_cli(capsys, "qcr", "--q", "2", "--alpha", "2", "--grid-count", "2001")
        b = run_cli(capsys, "qcr", "--q", "2", "--alpha", "2", "--grid-count", "2001")
        assert a == b and a[0] == EXIT_PASS

    def test_minimize_byte_identical(self, capsys):
        args = ("minimize", "--constraint", "moment", "--q", "2", "--alpha", "2",
                "--target", "0.2", "--seed", "3", "--perturbations", "10",
                "--grid-count", "2001")
        a = run_cli(capsys, *args)
        b = run_cli(capsys, *args)
        assert a == b and a[0] == EXIT_PASS


class TestConfigFile:
    def test_file_then_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.conf"
        cfg.write_text("q = 1.5\ngamma = 2.0  # comment\n")
        code, out, _ = run_cli(capsys, "qcr", "--config", str(cfg),
                               "--gamma", "0.5", "--grid-count", "8001")
        assert code == EXIT_PASS
        d = json.loads(out)
        assert d["config"]["q"] == 1.5       # from file
        assert d["config"]["gamma"] == 0.5   # flag wins
        assert d["config"]["threads"] == 1

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("q 1.5\n")
        with pytest.raises(ValueError):
            read_config_file(str(cfg))

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("volume = 3\n")
        code, _, err = run_cli(capsys, "qcr", "--config", str(cfg))
        assert code == EXIT_USAGE
        assert "unknown config keys" in err


class TestUsageErrors:
    def test_missing_seed_for_mc(self, capsys):
        code, _, err = run_cli(capsys, "crbound", "--trials", "100")
        assert code == EXIT_USAGE and "seed" in err

    def test_hoelder_inconsistency(self, capsys):
        code, _, err = run_cli(capsys, "qcr", "--alpha", "2", "--beta", "3")
        assert code == EXIT_USAGE and "Hoelder" in err

    def test_unknown_subcommand(self, capsys):
        assert run_cli(capsys, "frobnicate")[0] == EXIT_USAGE

    def test_minimize_requires_seed(self, capsys):
        code, _, err = run_cli(capsys, "minimize", "--constraint", "moment",
                               "--target", "0.2")
        assert code == EXIT_USAGE and "seed" in err


class TestNumericalErrors:
    def test_fast_diffusion_exit_code(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "diffuse", "--m", "0.5", "--beta", "2",
                               "--init", "gaussian", "--t0", "0", "--t-end", "0.01",
                               "-o", str(tmp_path / "t.csv"))
        assert code == EXIT_NUMERICAL
        assert "fast-diffusion" in err

    def test_nonintegrable_params_exit_code(self, capsys):
        # q < 1 needs alpha/(1-q) > n: violated at n = 2, q = 0.2, alpha = 1.5
        code, _, err = run_cli(capsys, "qcr", "--q", "0.2", "--alpha", "1.5", "--n", "2")
        assert code == EXIT_NUMERICAL
        assert "integrable" in err


class TestDiffuse:
    def test_csv_and_summary(self, capsys, tmp_path):
        out_path = tmp_path / "traj.csv"
        code, out, _ = run_cli(capsys, "diffuse", "--m", "1", "--beta", "2",
                               "--init", "gaussian", "--t0", "0", "--t-end", "0.05",
                               "--grid-lo", "-9", "--grid-hi", "9",
                               "--grid-count", "1001", "--n-logs", "21",
                               "-o", str(out_path))
        assert code == EXIT_PASS
        lines = out_path.read_text().strip().split("\n")
        assert lines[0] == "t,mass,M_q,S_q,phi,dSdt_fd,rhs_identity,rel_err"
        assert len(lines) == 22
        summary = json.loads(out)
        assert summary["debruijn_ok"] and summary["monotonicity_ok"]

    def test_requires_output(self, capsys):
        code, _, err = run_cli(capsys, "diffuse")
        assert code == EXIT_USAGE and "output" in err


class TestCrbound:
    def test_json_fields(self, capsys):
        code, out, _ = run_cli(capsys, "crbound", "--model", "gaussian-location",
                               "--trials", "20000", "--seed", "4")
        assert code == EXIT_PASS
        d = json.loads(out)
        for key in ("lhs", "rhs", "gap", "equality_residual", "mc", "mc_se"):
            assert key in d
        assert d["lhs"] == pytest.approx(1.0, abs=1e-6)
        assert d["mc_consistent"] is True

    def test_escort_pair_model(self, capsys):
        code, out, _ = run_cli(capsys, "crbound", "--model", "escort-pair",
                               "--q", "2", "--alpha", "2")
        assert code == EXIT_PASS
        d = json.loads(out)
        assert d["lhs"] >= d["rhs"] - 1e-9


class TestStamCommand:
    def test_report_shape(self, capsys):
        code, out, _ = run_cli(capsys, "stam", "--q", "2", "--beta", "2",
                               "--gamma", "1", "--grid-count", "2001",
                               "--perturbations", "5", "--seed", "12")
        assert code == EXIT_PASS
        d = json.loads(out)
        for key in ("value_G", "min_perturbed", "worst_gap", "verdict", "ratio"):
            assert key in d
        assert d["verdict"] is True
        assert d["min_perturbed"] > 1.0


def test_output_file_written(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "qcr", "--grid-count", "2001", "-o", str(out_path))
    assert code == EXIT_PASS
    assert out == ""
    d = json.loads(out_path.read_text())
    assert d["product"] == pytest.approx(1.0, abs=1e-4)
