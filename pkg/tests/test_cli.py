import json

import numpy as np
import pytest
from click.testing import CliRunner

import focklab as fl
from focklab.cli import main

# the measured-state fixtures legitimately trip the dim=16 deficit flag
pytestmark = pytest.mark.filterwarnings("ignore::focklab.TruncationWarning")


@pytest.fixture
def runner():
    return CliRunner()


def gen(runner, tmp_path, *extra):
    path = tmp_path / "in.json"
    result = runner.invoke(main, ["gen-state", "--sq-db", "-1.9", "--antisq-db", "6.1",
                                  "--dim", "16", "-o", str(path), *extra])
    assert result.exit_code == 0, result.output
    return path


class TestGenState:
    def test_metrics_match_inputs(self, runner, tmp_path):
        path = gen(runner, tmp_path)
        rho = fl.load_density_matrix(path)
        m = fl.squeezing_metrics(rho)
        assert m["db_min"] == pytest.approx(-1.9, abs=0.01)
        assert m["db_max"] == pytest.approx(6.1, abs=0.01)
        assert rho.shape == (16, 16)

    def test_vacuum_flag(self, runner, tmp_path):
        path = tmp_path / "vac.json"
        result = runner.invoke(main, ["gen-state", "--vacuum", "-o", str(path)])
        assert result.exit_code == 0
        assert np.array_equal(fl.load_density_matrix(path), fl.vacuum(16))

    def test_pure_squeezed_by_r(self, runner, tmp_path):
        path = tmp_path / "pure.json"
        result = runner.invoke(main, ["gen-state", "--r", "0.2187", "-o", str(path)])
        assert result.exit_code == 0
        assert fl.purity(fl.load_density_matrix(path)) == pytest.approx(1.0, abs=1e-10)

    def test_missing_mode_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["gen-state", "-o", str(tmp_path / "x.json")])
        assert result.exit_code == 2

    def test_conflicting_modes_rejected(self, runner, tmp_path):
        result = runner.invoke(main, ["gen-state", "--vacuum", "--r", "0.1",
                                      "-o", str(tmp_path / "x.json")])
        assert result.exit_code == 2

    def test_config_echo_present(self, runner, tmp_path):
        path = gen(runner, tmp_path)
        config = json.loads(path.read_text())["config"]
        assert config["command"] == "gen-state"
        assert config["dim"] == 16


class TestSimulate:
    def test_row_count_and_determinism(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        for out in (out_a, out_b):
            result = runner.invoke(main, ["simulate", "--state", str(state),
                                          "--samples", "5000", "--seed", "7",
                                          "-o", str(out)])
            assert result.exit_code == 0, result.output
        assert len(out_a.read_text().splitlines()) == 5001
        assert out_a.read_text() == out_b.read_text()

    def test_loss_shifts_binned_minimum(self, runner, tmp_path):
        state = tmp_path / "in32.json"
        runner.invoke(main, ["gen-state", "--sq-db", "-1.9", "--antisq-db", "6.1",
                             "--dim", "32", "-o", str(state)])
        out = tmp_path / "loss.csv"
        result = runner.invoke(main, ["simulate", "--state", str(state), "--eta", "0.33",
                                      "--samples", "200000", "--seed", "3",
                                      "-o", str(out)])
        assert result.exit_code == 0, result.output
        curve = fl.noise_curve_from_data(fl.load_dataset(out), n_phase_bins=25)
        assert curve.db.min() == pytest.approx(-0.54, abs=0.2)

    def test_digitizer_metadata(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        out = tmp_path / "dig.csv"
        result = runner.invoke(main, ["simulate", "--state", str(state),
                                      "--samples", "2000", "--seed", "1",
                                      "--digitize", "8", "-o", str(out)])
        assert result.exit_code == 0, result.output
        meta = json.loads((tmp_path / "dig.meta.json").read_text())
        assert meta["digitizer_bits"] == 8
        assert meta["digitizer_range"] > 0
        assert meta["config"]["digitize_bits"] == 8

    def test_unreadable_state_file(self, runner, tmp_path):
        result = runner.invoke(main, ["simulate", "--state", str(tmp_path / "no.json"),
                                      "-o", str(tmp_path / "x.csv")])
        assert result.exit_code == 2  # click validates existence


class TestReconstruct:
    def test_dim_honored_and_diagnostics(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        data = tmp_path / "d.csv"
        runner.invoke(main, ["simulate", "--state", str(state), "--samples", "30000",
                             "--seed", "5", "-o", str(data)])
        out = tmp_path / "rec.json"
        result = runner.invoke(main, ["reconstruct", "--data", str(data), "--dim", "16",
                                      "--max-iters", "150", "-o", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["dim"] == 16
        assert set(payload["diagnostics"]) == {"iterations", "final_log_likelihood",
                                               "converged"}
        fl.check_density_matrix(fl.load_density_matrix(out))

    def test_vacuum_known_truth(self, runner, tmp_path):
        state = tmp_path / "vac.json"
        runner.invoke(main, ["gen-state", "--vacuum", "-o", str(state)])
        data = tmp_path / "vac.csv"
        runner.invoke(main, ["simulate", "--state", str(state), "--samples", "100000",
                             "--seed", "2", "-o", str(data)])
        out = tmp_path / "vrec.json"
        result = runner.invoke(main, ["reconstruct", "--data", str(data),
                                      "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert fl.fidelity(fl.load_density_matrix(out), fl.vacuum(16)) >= 0.999

    def test_empty_file_is_parse_error(self, runner, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("")
        result = runner.invoke(main, ["reconstruct", "--data", str(bad),
                                      "-o", str(tmp_path / "x.json")])
        assert result.exit_code == 1
        assert "line 1" in result.output

    def test_malformed_row_names_line(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("phase_rad,value\n0.0,1.0\nbroken\n")
        result = runner.invoke(main, ["reconstruct", "--data", str(bad),
                                      "-o", str(tmp_path / "x.json")])
        assert result.exit_code == 1
        assert "line 3" in result.output


class TestChannelFit:
    def test_identical_states(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        out = tmp_path / "sweep.json"
        result = runner.invoke(main, ["channel-fit", "--input", str(state),
                                      "--target", str(state), "--grid-step", "0.01",
                                      "-o", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["best_eta"] == 1.0
        assert len(payload["etas"]) == 101

    def test_grid_step_honored(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        out = tmp_path / "sweep.json"
        runner.invoke(main, ["channel-fit", "--input", str(state), "--target",
                             str(state), "--grid-step", "0.001", "-o", str(out)])
        assert len(json.loads(out.read_text())["etas"]) == 1001

    def test_dimension_mismatch(self, runner, tmp_path):
        a = gen(runner, tmp_path)
        b = tmp_path / "small.json"
        runner.invoke(main, ["gen-state", "--vacuum", "--dim", "8", "-o", str(b)])
        result = runner.invoke(main, ["channel-fit", "--input", str(a), "--target",
                                      str(b), "-o", str(tmp_path / "x.json")])
        assert result.exit_code == 1
        assert "mismatch" in result.output


class TestReport:
    def test_state_report_metrics(self, runner, tmp_path):
        state = tmp_path / "in32.json"
        runner.invoke(main, ["gen-state", "--sq-db", "-1.9", "--antisq-db", "6.1",
                             "--dim", "32", "-o", str(state)])
        out = tmp_path / "report.json"
        result = runner.invoke(main, ["report", "--state", str(state), "-o", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["state"]["metrics"]["db_min"] == pytest.approx(-1.9, abs=0.01)
        assert "noise_curve" in payload["state"]

    def test_byte_identical_reports(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        a, b = tmp_path / "r1.json", tmp_path / "r2.json"
        for out in (a, b):
            result = runner.invoke(main, ["report", "--state", str(state),
                                          "--wigner", "--wigner-points", "41",
                                          "-o", str(out)])
            assert result.exit_code == 0, result.output
        assert a.read_bytes() == b.read_bytes()

    def test_data_report(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        data = tmp_path / "d.csv"
        runner.invoke(main, ["simulate", "--state", str(state), "--samples", "60000",
                             "--seed", "9", "-o", str(data)])
        out = tmp_path / "report.json"
        result = runner.invoke(main, ["report", "--data", str(data), "--phase-bins",
                                      "20", "-o", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["data"]["n_records"] == 60000

    def test_wigner_csv_sidecar(self, runner, tmp_path):
        state = gen(runner, tmp_path)
        out = tmp_path / "report.json"
        csv = tmp_path / "wigner.csv"
        result = runner.invoke(main, ["report", "--state", str(state),
                                      "--wigner-points", "21", "--wigner-csv",
                                      str(csv), "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert csv.read_text().splitlines()[0] == "x,p,w"
        assert "wigner" in json.loads(out.read_text())["state"]

    def test_no_inputs_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["report", "-o", str(tmp_path / "x.json")])
        assert result.exit_code == 2


class TestOutputDirEnv:
    def test_relative_paths_land_in_env_dir(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("FOCKLAB_OUTPUT_DIR", str(tmp_path))
        monkeypatch.chdir(tmp_path)
        result = runner.invoke(main, ["gen-state", "--vacuum", "-o", "vac.json"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "vac.json").exists()
