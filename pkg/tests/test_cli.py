"""Command-line interface tests: bundled configs, exit codes, file outputs,
manifests and reproducibility."""

import json
import os

import pytest

from pikappa import cli


def run(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_a1_eta1_case_iii(self, capsys):
        code, out, _ = run(["solve", "--model", "a1", "--eta", "1.0"], capsys)
        assert code == 0
        fields = dict(line.split(" = ") for line in out.strip().splitlines())
        assert fields["case"] == "DiffRates-iii"
        assert float(fields["pi_sum"]) == pytest.approx(1.0, abs=1e-6)

    def test_c1_rho_override_full_insurance(self, capsys):
        code, out, _ = run(["solve", "--model", "c1", "--rho", "0.6"], capsys)
        assert code == 0
        fields = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(fields["kappa"]) == 0.0
        assert float(fields["pi_1"]) == pytest.approx(-0.2222, abs=1e-4)

    def test_malformed_file_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken json!")
        code, _, err = run(["solve", "--model", str(bad)], capsys)
        assert code == 1
        assert "line" in err

    def test_missing_file_exit_1(self, capsys):
        code, _, err = run(["solve", "--model", "nope.json"], capsys)
        assert code == 1

    def test_invalid_model_exit_1(self, tmp_path, capsys):
        doc = json.loads(open(cli.resolve_model_path("c1")).read())
        doc["R"] = 0.001   # below r
        p = tmp_path / "bad_rates.json"
        p.write_text(json.dumps(doc))
        code, _, err = run(["solve", "--model", str(p)], capsys)
        assert code == 1

    def test_thresholds_flag(self, capsys):
        code, out, _ = run(["solve", "--model", "a1", "--thresholds"], capsys)
        assert code == 0
        fields = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(fields["eta_R"]) == pytest.approx(0.60, abs=0.01)
        assert float(fields["eta_r"]) == pytest.approx(1.47, abs=0.01)

    def test_json_format(self, capsys):
        code, out, _ = run(["solve", "--model", "c2", "--format", "json"],
                           capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["case"].startswith("DiffRates")


class TestSweep:
    def test_zero_steps_exit_1(self, tmp_path, capsys):
        code, _, err = run(["sweep", "--model", "c1", "--param", "rho",
                            "--from", "-1", "--to", "1", "--steps", "0",
                            "--out", str(tmp_path / "x.csv")], capsys)
        assert code == 1

    def test_bad_param_exit_1(self, tmp_path, capsys):
        code, _, err = run(["sweep", "--model", "c1", "--param", "zeta",
                            "--from", "0", "--to", "1", "--steps", "4",
                            "--out", str(tmp_path / "x.csv")], capsys)
        assert code == 1

    def test_csv_and_manifest_and_determinism(self, tmp_path, capsys):
        out1 = tmp_path / "s1.csv"
        out2 = tmp_path / "s2.csv"
        base = ["sweep", "--model", "c2", "--param", "rho", "--from", "-0.5",
                "--to", "0.5", "--steps", "10"]
        assert run(base + ["--out", str(out1)], capsys)[0] == 0
        assert run(base + ["--out", str(out2)], capsys)[0] == 0
        assert out1.read_text() == out2.read_text()
        man = json.loads((tmp_path / "s1.csv.manifest.json").read_text())
        assert man["outputs"] == ["s1.csv"]
        assert "input_sha256" in man and "tool_version" in man

    def test_threaded_matches_serial(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        base = ["sweep", "--model", "c2", "--param", "rho", "--from", "-0.8",
                "--to", "0.8", "--steps", "16"]
        run(base + ["--out", str(a)], capsys)
        run(base + ["--out", str(b), "--threads", "4"], capsys)
        assert a.read_text() == b.read_text()

    def test_svg_plot_written(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        svg = tmp_path / "s.svg"
        code, _, _ = run(["sweep", "--model", "c2", "--param", "rho",
                          "--from", "-0.5", "--to", "0.5", "--steps", "6",
                          "--out", str(out), "--plot", str(svg),
                          "--y", "pi_sum,kappa"], capsys)
        assert code == 0
        text = svg.read_text()
        assert text.startswith("<svg") and "polyline" in text


class TestVerify:
    def test_c2_all_pass(self, capsys):
        code, out, _ = run(["verify", "--model", "c2", "--mc-paths",
                            "400000"], capsys)
        assert code == 0
        assert "[pass] certificate" in out
        assert "[pass] oracle-gap" in out
        assert "[pass] mc-vs-closed-form" in out

    def test_low_power_mc_inconclusive(self, capsys):
        code, out, _ = run(["verify", "--model", "c2", "--mc-paths", "100"],
                           capsys)
        assert code == 0
        assert "[inconclusive] mc-vs-closed-form" in out


class TestMutualFund:
    def test_eta_bar_outside_exit_1(self, capsys):
        code, _, err = run(["mutual-fund", "--model", "a1", "--eta1", "2",
                            "--eta2", "5", "--eta-bar", "6"], capsys)
        assert code == 1

    def test_a2_case_iii_triple(self, capsys):
        code, out, _ = run(["mutual-fund", "--model", "a2", "--eta1", "1.0",
                            "--eta2", "2.0", "--eta-bar", "1.5"], capsys)
        assert code == 0
        fields = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(fields["max_discrepancy"]) <= 1e-5
        assert fields["cases"].count("DiffRates-iii") == 3

    def test_case_mismatch_exit_2(self, capsys):
        code, _, err = run(["mutual-fund", "--model", "a1", "--eta1", "1.0",
                            "--eta2", "5.0", "--eta-bar", "2.0"], capsys)
        assert code == 2
        assert "mismatch" in err.lower() or "differ" in err.lower()


class TestOracleCmd:
    def test_solver_within_bound(self, capsys):
        code, out, _ = run(["oracle", "--model", "c2", "--resolution", "201",
                            "--refine-resolution", "801"], capsys)
        assert code == 0
        fields = dict(line.split(" = ") for line in out.strip().splitlines())
        assert fields["within_bound"] == "True"


class TestSimulateCmd:
    def test_c2_z_small(self, capsys):
        code, out, _ = run(["simulate", "--model", "c2", "--paths", "200000",
                            "--seed", "3"], capsys)
        assert code == 0
        fields = dict(line.split(" = ") for line in out.strip().splitlines())
        assert abs(float(fields["z"])) <= 3.5


class TestVerifyInvalidModel:
    def test_r_above_R_exit_1(self, tmp_path, capsys):
        doc = json.loads(open(cli.resolve_model_path("c2")).read())
        doc["R"] = 0.001
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(doc))
        code, _, err = run(["verify", "--model", str(p)], capsys)
        assert code == 1
        assert "validation" in err
