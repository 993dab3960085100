import json
import shlex

import pytest

from config import settings
from app.cli import grid_points, main
from conftest import csv_rows, metadata


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rerun(capsys, command):
    return run(capsys, *shlex.split(command))


class TestSir:
    def test_sigma_sym_of_half_rate(self, capsys):
        code, out, _ = run(capsys, "sir", "--rate", "0.5")
        assert code == 0
        [(rate, sigma)] = csv_rows(out)
        assert float(rate) == 0.5
        assert float(sigma) == pytest.approx(0.805, abs=0.003)
        assert metadata(out)["rate"] == "0.5"
        assert metadata(out)["command"] == "sir --rate 0.5"

    def test_huge_noise(self, capsys):
        code, out, _ = run(capsys, "sir", "--sigma", "1000")
        assert code == 0
        [(_, rate)] = csv_rows(out)
        assert 0.0 <= float(rate) <= 1e-3

    def test_grid(self, capsys):
        code, out, _ = run(capsys, "sir", "--sigma-grid", "0.5:1.0:0.25")
        assert code == 0
        assert [row[0] for row in csv_rows(out)] == ["0.5", "0.75", "1"]

    def test_rate_outside_unit_interval(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["sir", "--rate", "1.5"])
        assert excinfo.value.code == 2
        assert "--rate" in capsys.readouterr().err

    def test_needs_exactly_one_target(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["sir", "--rate", "0.5", "--sigma", "0.8"])
        assert excinfo.value.code == 2

    def test_grid_points(self):
        assert grid_points((0.1, 0.3, 0.1)).tolist() == [0.1, 0.2, 0.3]


class TestDeTrace:
    ARGS = ("de-trace", "--dl", "3", "--dr", "6", "--sigma", "0.6", "--N", "2000", "--T", "100", "--seed", "5")

    def test_decodable_below_threshold(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        info = metadata(out)
        assert info["decodable"] == "true"
        assert info["N"] == "2000"
        rows = csv_rows(out)
        assert len(rows) == int(info["iterations"])
        assert float(rows[-1][2]) == 0.0

    def test_reruns_are_byte_identical(self, capsys):
        _, first, _ = run(capsys, *self.ARGS)
        _, second, _ = run(capsys, *self.ARGS)
        assert first == second

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out" / "trace.csv"
        code, out, _ = run(capsys, *self.ARGS, "--output", str(path))
        assert code == 0
        assert out == ""
        assert path.read_text(encoding="utf-8").startswith("# tool: relay-de")

    def test_coupled_positions(self, capsys):
        code, out, _ = run(capsys, "de-trace", "--L", "5", "--sigma", "0.9", "--N", "500", "--T", "3")
        assert code == 0
        assert [row[:2] for row in csv_rows(out)[:5]] == [["1", str(p)] for p in range(1, 6)]

    def test_even_variable_degree_chain_is_a_domain_error(self, capsys):
        code, out, err = run(capsys, "de-trace", "--dl", "4", "--dr", "8", "--L", "10", "--sigma", "0.5")
        assert code == 1
        assert out == ""
        assert "error:" in err

    def test_sigma_is_required(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["de-trace"])
        assert excinfo.value.code == 2


class TestDescribe:
    def test_coupled(self, capsys):
        code, out, _ = run(capsys, "describe", "--L", "5")
        assert code == 0
        info = json.loads(out)
        assert info["check_count"] == 7
        assert info["design_rate"] == pytest.approx(0.3)

    def test_metadata_echo_reproduces_output(self, capsys):
        _, out, _ = run(capsys, "describe", "--dl", "3", "--dr", "9", "--L", "6")
        block = json.loads(out)["metadata"]
        assert block["tool"].startswith("relay-de ")
        assert block["params"]["L"] == 6
        assert "--seed" in block["command"]
        assert rerun(capsys, block["command"])[1] == out

    def test_invalid_degrees(self, capsys):
        code, _, err = run(capsys, "describe", "--dl", "6", "--dr", "3")
        assert code == 1
        assert "error:" in err


class TestSimulate:
    def test_low_noise(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "200", "--sigma", "0.05", "--trials", "3", "--iters", "5")
        assert code == 0
        assert metadata(out)["fer"] == "0"
        rows = csv_rows(out)
        assert [row[0] for row in rows] == ["1", "2", "3", "4", "5"]
        assert all(float(row[1]) == 0.0 for row in rows)

    def test_per_trial_rows(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--n", "200", "--sigma", "0.05", "--trials", "2", "--iters", "3", "--per-trial"
        )
        assert code == 0
        assert len(csv_rows(out)) == 6
        command = metadata(out)["command"]
        assert "--per-trial" in command
        assert rerun(capsys, command)[1] == out

    def test_ml_comparison(self, capsys, tmp_path):
        graph_path = tmp_path / "graph.txt"
        code, out, _ = run(
            capsys, "simulate", "--n", "20", "--sigma", "0.6", "--trials", "10", "--iters", "20",
            "--ml", "--graph-out", str(graph_path)
        )
        assert code == 0
        assert [row[0] for row in csv_rows(out)] == ["ml", "bp"]
        assert graph_path.read_text(encoding="utf-8").splitlines()[0] == "20 10 3 6"

        command = metadata(out)["command"]
        assert " --ml" in command and "true" not in command
        assert rerun(capsys, command)[1] == out

    def test_block_length_mismatch(self, capsys):
        code, _, err = run(capsys, "simulate", "--n", "201", "--trials", "1")
        assert code == 1
        assert "error:" in err


class TestThreshold:
    def test_single_search(self, capsys, step_threshold):
        step_threshold(0.7423)
        code, out, _ = run(capsys, "threshold", "--tol", "0.01")
        assert code == 0
        result = json.loads(out)
        assert result["lower"] < 0.7423 <= result["upper"]
        assert "lower_trace" not in result
        assert result["probes"][0]["sigma"] == 0.4
        assert result["metadata"]["params"]["tol"] == 0.01

    def test_sweep_with_extrapolation(self, capsys, step_threshold):
        step_threshold(lambda spec: 0.75 + 0.5 / spec.length)
        code, out, _ = run(capsys, "threshold", "--sweep-L", "5,10,20", "--extrapolate", "--tol", "0.0005")
        assert code == 0
        sweep = json.loads(out)
        assert [row["length"] for row in sweep["rows"]] == [5, 10, 20]
        assert sweep["extrapolation"]["sigma_inf"] == pytest.approx(0.75, abs=0.005)
        assert all("upper_trace" not in result for result in sweep["results"])
        command = sweep["metadata"]["command"]
        assert "--sweep-L 5,10,20" in command and "--extrapolate" in command
        assert rerun(capsys, command)[1] == out

    def test_high_fidelity_profile(self, capsys, step_threshold):
        step_threshold(0.7423)
        code, out, _ = run(capsys, "threshold", "--paper-fidelity", "--tol", "0.001")
        assert code == 0
        result = json.loads(out)
        assert result["config"]["population_size"] == settings.fidelity_population_size
        assert result["config"]["max_iterations"] == settings.fidelity_max_iterations
        assert result["estimate"] == pytest.approx(0.742, abs=0.005)
        command = result["metadata"]["command"]
        assert f"--N {settings.fidelity_population_size}" in command
        assert rerun(capsys, command)[1] == out

    def test_forced_extrapolation_on_two_lengths(self, capsys, step_threshold):
        step_threshold(0.78)
        code, _, err = run(capsys, "threshold", "--sweep-L", "10,20", "--extrapolate", "--tol", "0.01")
        assert code == 1
        assert "error:" in err

    def test_bad_bracket(self, capsys, step_threshold):
        step_threshold(5.0)
        code, _, err = run(capsys, "threshold", "--bracket", "0.4,1.0", "--tol", "0.01")
        assert code == 1
        assert "bracket" in err.lower()


class TestCampaign:
    def test_rows_per_ensemble(self, capsys, step_threshold):
        step_threshold(lambda spec: {6: 0.742, 9: 0.624}[spec.d_r])
        code, out, _ = run(capsys, "campaign", "--ensembles", "3,6;3,9", "--tol", "0.001")
        assert code == 0
        rows = csv_rows(out)
        assert [row[0] for row in rows] == ["(3,6)", "(3,9)"]
        assert rows[0][1] == ""
        assert float(rows[0][4]) == pytest.approx(0.805, abs=0.003)
        assert metadata(out)["ensembles"] == "3,6;3,9"
        assert "--ensembles '3,6;3,9'" in metadata(out)["command"]
