import csv
import json
import math

import numpy as np
import pytest

from gmur.cli import (EX_INVALID, EX_IO, EX_MALFORMED, EX_OK, EX_USAGE,
                      directions_from_alpha, main)
from gmur.observables import GaussianBiObservable, ScalarCovariantObservable, observable_from_json
from gmur.states import GaussianState, state_from_json


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_json(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


GOOD_STATE = {"hbar": 1.0, "n": 1, "a": [0.0], "b": [0.0],
              "A": [[0.5]], "B": [[0.5]], "C": [[0.0]]}
BAD_STATE = {"hbar": 1.0, "n": 1, "a": [0.0], "b": [0.0],
             "A": [[0.1]], "B": [[0.1]], "C": [[0.0]]}


class TestValidate:
    def test_valid_state(self, capsys, tmp_path):
        path = write_json(tmp_path, "good.json", GOOD_STATE)
        code, out, _ = run(capsys, "validate", path)
        assert code == EX_OK
        assert json.loads(out)["valid"] is True

    def test_invalid_state_reports_eigenvalue(self, capsys, tmp_path):
        path = write_json(tmp_path, "bad.json", BAD_STATE)
        code, out, _ = run(capsys, "validate", path)
        assert code == EX_INVALID
        report = json.loads(out)
        assert report["min_eigenvalue"] == pytest.approx(-0.4, abs=1e-12)

    def test_truncated_json(self, capsys, tmp_path):
        path = tmp_path / "trunc.json"
        path.write_text('{"hbar": 1.0,', encoding="utf-8")
        code, _, err = run(capsys, "validate", str(path))
        assert code == EX_MALFORMED
        assert "malformed" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "validate", str(tmp_path / "nope.json"))
        assert code == EX_IO

    def test_observable_schema(self, capsys, tmp_path):
        path = write_json(tmp_path, "obs.json", {
            "hbar": 1.0, "u": [1.0], "v": [1.0],
            "a": 0.0, "b": 0.0, "V11": 0.5, "V22": 0.5, "V12": 0.0})
        code, out, _ = run(capsys, "validate", path)
        assert code == EX_OK
        assert json.loads(out)["kind"] == "observable"

    def test_unknown_schema(self, capsys, tmp_path):
        path = write_json(tmp_path, "odd.json", {"weird": 1})
        code, _, _ = run(capsys, "validate", path)
        assert code == EX_MALFORMED

    def test_env_tolerance_override(self, capsys, tmp_path, monkeypatch):
        nearly = dict(GOOD_STATE, A=[[0.5 - 1e-6]])
        path = write_json(tmp_path, "near.json", nearly)
        code, _, _ = run(capsys, "validate", path)
        assert code == EX_INVALID
        monkeypatch.setenv("GMUR_TOL", "1e-3")
        code, _, _ = run(capsys, "validate", path)
        assert code == EX_OK


class TestBound:
    def test_vector_reference_value(self, capsys):
        code, out, _ = run(capsys, "bound", "vector", "--n", "1", "--hbar", "1",
                           "--eps1", "0.5", "--eps2", "0.5")
        assert code == EX_OK
        report = json.loads(out)
        assert report["value"] == pytest.approx(0.27865, abs=1e-5)
        assert report["is_exact"] is True

    def test_round_trip_revalidates(self, capsys):
        code, out, _ = run(capsys, "bound", "vector", "--n", "2", "--hbar", "1",
                           "--eps1", "0.7", "--eps2", "0.6")
        assert code == EX_OK
        report = json.loads(out)
        assert isinstance(state_from_json(report["worst_state"]), GaussianState)
        assert isinstance(observable_from_json(report["optimizer"]), GaussianBiObservable)

    def test_scalar_round_trip_revalidates(self, capsys):
        code, out, _ = run(capsys, "bound", "scalar", "--alpha", "0.7",
                           "--eps1", "0.5", "--eps2", "0.5")
        assert code == EX_OK
        report = json.loads(out)
        assert isinstance(state_from_json(report["worst_state"]), GaussianState)
        assert isinstance(observable_from_json(report["optimizer"]),
                          ScalarCovariantObservable)

    def test_orthogonal_short_circuit(self, capsys):
        code, out, _ = run(capsys, "bound", "scalar", "--alpha", "1.5707963",
                           "--eps1", "0.5", "--eps2", "0.5")
        assert code == EX_OK
        assert abs(json.loads(out)["value"]) < 1e-9

    def test_below_threshold_not_exact(self, capsys):
        code, out, _ = run(capsys, "bound", "vector", "--n", "1",
                           "--eps1", "0.1", "--eps2", "0.1")
        assert code == EX_OK
        report = json.loads(out)
        assert report["is_exact"] is False
        assert report["regime"] == "below_quantum_threshold"

    def test_nats_units(self, capsys):
        code, out, _ = run(capsys, "bound", "vector", "--n", "1",
                           "--eps1", "0.5", "--eps2", "0.5", "--units", "nats")
        report = json.loads(out)
        assert report["units"] == "nats"
        assert report["value"] == pytest.approx(math.log(2.0) - 0.5, abs=1e-12)

    def test_missing_flags_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bound", "vector", "--n", "1"])
        assert exc.value.code == EX_USAGE

    def test_scalar_without_alpha_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bound", "scalar", "--eps1", "0.5", "--eps2", "0.5"])
        assert exc.value.code == EX_USAGE


class TestSweep:
    def test_alpha_sweep_monotone(self, capsys, tmp_path):
        out_csv = tmp_path / "alpha.csv"
        code, _, err = run(capsys, "sweep", "--variable", "alpha",
                           "--start", "0", "--stop", str(math.pi / 2),
                           "--count", "50", "--eps1", "0.5", "--eps2", "0.5",
                           "--out", str(out_csv))
        assert code == EX_OK
        with open(out_csv, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["variable", "value_bits", "regime", "is_exact"]
        values = [float(row[1]) for row in rows[1:]]
        assert len(values) == 50
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-12
        assert (tmp_path / "alpha.png").exists()

    def test_no_plot_flag(self, capsys, tmp_path):
        out_csv = tmp_path / "noplot.csv"
        code, _, _ = run(capsys, "sweep", "--variable", "alpha",
                         "--start", "0", "--stop", "1.0", "--count", "5",
                         "--eps1", "0.5", "--eps2", "0.5",
                         "--out", str(out_csv), "--no-plot")
        assert code == EX_OK
        assert not (tmp_path / "noplot.png").exists()

    def test_hbar_log_sweep_to_classical_limit(self, capsys, tmp_path):
        out_csv = tmp_path / "hbar.csv"
        code, _, _ = run(capsys, "sweep", "--variable", "hbar",
                         "--start", "1", "--stop", "1e-6", "--count", "13",
                         "--spacing", "log", "--kind", "vector", "--n", "1",
                         "--eps1", "0.5", "--eps2", "0.5", "--out", str(out_csv))
        assert code == EX_OK
        with open(out_csv, newline="") as fh:
            values = [float(row[1]) for row in list(csv.reader(fh))[1:]]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-12

    def test_eps_product_sweep_crosses_threshold_once(self, capsys, tmp_path):
        out_csv = tmp_path / "eps.csv"
        code, _, _ = run(capsys, "sweep", "--variable", "eps_product",
                         "--start", "0.01", "--stop", "10", "--count", "41",
                         "--spacing", "log", "--kind", "vector", "--n", "1",
                         "--eps1", "1.0", "--eps2", "1.0", "--out", str(out_csv))
        assert code == EX_OK
        with open(out_csv, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        regimes = [row[2] for row in rows]
        flips = sum(1 for a, b in zip(regimes, regimes[1:]) if a != b)
        assert flips == 1
        values = [float(row[1]) for row in rows]
        jumps = [abs(a - b) for a, b in zip(values, values[1:])]
        assert max(jumps) < 0.1  # no discontinuity at the regime flip

    def test_explicit_values_grid(self, capsys, tmp_path):
        out_csv = tmp_path / "vals.csv"
        code, _, _ = run(capsys, "sweep", "--variable", "n",
                         "--values", "1,2,3", "--kind", "vector",
                         "--eps1", "0.5", "--eps2", "0.5", "--out", str(out_csv))
        assert code == EX_OK
        with open(out_csv, newline="") as fh:
            values = [float(row[1]) for row in list(csv.reader(fh))[1:]]
        assert values[1] == pytest.approx(2 * values[0], rel=1e-12)
        assert values[2] == pytest.approx(3 * values[0], rel=1e-12)

    def test_unwritable_path(self, capsys):
        code, _, err = run(capsys, "sweep", "--variable", "alpha",
                           "--start", "0", "--stop", "1", "--count", "3",
                           "--eps1", "0.5", "--eps2", "0.5",
                           "--out", "/nonexistent_dir_gmur/out.csv")
        assert code == EX_IO
        assert "cannot write" in err

    def test_log_spacing_needs_positive(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--variable", "alpha", "--start", "0", "--stop", "1",
                  "--count", "3", "--spacing", "log", "--eps1", "0.5",
                  "--eps2", "0.5", "--out", "/tmp/x.csv"])
        assert exc.value.code == EX_USAGE

    def test_deterministic_output(self, capsys, tmp_path):
        args = ["sweep", "--variable", "alpha", "--start", "0", "--stop", "1.2",
                "--count", "9", "--eps1", "0.5", "--eps2", "0.5", "--no-plot"]
        path_a, path_b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, *args, "--out", str(path_a))
        run(capsys, *args, "--out", str(path_b))
        assert path_a.read_bytes() == path_b.read_bytes()


class TestVerifyCommand:
    def test_scalar_suite_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "scalar",
                           "--seed", "7", "--budget", "4000")
        assert code == EX_OK
        records = [json.loads(line) for line in out.strip().splitlines()]
        assert len(records) >= 3
        assert all(record["ok"] for record in records)

    def test_entropy_suite_has_pass_rate(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "entropy", "--seed", "3")
        assert code == EX_OK
        record = json.loads(out.strip().splitlines()[-1])
        assert "pass_rate" in record

    def test_repeatable_bytes(self, capsys):
        _, out_a, _ = run(capsys, "verify", "--suite", "scalar",
                          "--seed", "11", "--budget", "2000")
        _, out_b, _ = run(capsys, "verify", "--suite", "scalar",
                          "--seed", "11", "--budget", "2000")
        assert out_a == out_b

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "report.jsonl"
        code, out, _ = run(capsys, "verify", "--suite", "scalar",
                           "--seed", "5", "--budget", "2000",
                           "--out", str(path))
        assert code == EX_OK
        assert out == ""
        lines = path.read_text().strip().splitlines()
        assert all(json.loads(line)["ok"] for line in lines)


class TestExample:
    def test_both_examples_validate(self, capsys):
        code, out, _ = run(capsys, "example", "--alpha", "1.0471975511965976",
                           "--delta", "0.5")
        assert code == EX_OK
        data = json.loads(out)
        noisy = data["noisy_position_then_momentum"]
        assert noisy["V11"] == pytest.approx(0.5)
        assert noisy["V22"] == pytest.approx(0.125, rel=1e-9)
        assert isinstance(observable_from_json(noisy), ScalarCovariantObservable)
        pvm = data["orthogonal_pvm"]
        assert pvm["V11"] == 0.0 and pvm["V22"] == 0.0
        assert isinstance(observable_from_json(pvm), ScalarCovariantObservable)


def test_directions_embedding():
    u, v, n = directions_from_alpha(0.0)
    assert n == 1 and v[0] == 1.0
    u, v, n = directions_from_alpha(math.pi)
    assert n == 1 and v[0] == -1.0
    u, v, n = directions_from_alpha(0.9)
    assert n == 2
    assert float(u @ v) == pytest.approx(math.cos(0.9), abs=1e-15)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)
