"""
Command-line runs: outputs on disk, exit codes and reproducibility.
"""

import json

import numpy as np
import pandas as pd
import pytest

from app import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


def spectrum_config(**overrides) -> dict:
    document = {
        "model": "minimal",
        "params": {"T": 1.0, "N": 6},
        "sweep": {"parameter": "lam", "start": 0.0, "stop": 3.0, "steps": 13},
    }
    document.update(overrides)
    return document


class TestSpectrumRun:

    def test_writes_outputs(self, write_config, tmp_path):
        out = tmp_path / "spectrum"
        assert main(["spectrum", "--config", write_config(spectrum_config()), "--out", str(out)]) == EXIT_OK

        for name in ("run_config.json", "spectrum.csv", "p_com.csv", "spectrum_pbc.csv",
                     "bandwidth.csv", "bandwidth.html", "bandwidth.svg", "eps.json", "spectrum_summary.json",
                     "spectrum.html", "spectrum.svg"):
            assert (out / name).exists(), name

        spectrum = pd.read_csv(out / "spectrum.csv")
        assert list(spectrum.columns) == ["param", "index", "re_E", "im_E"]
        assert len(spectrum) == 13 * 6

        summary = json.loads((out / "spectrum_summary.json").read_text())
        assert summary["points"] == 13
        assert summary["critical_parameter"] == pytest.approx(np.pi / 2.0, rel=1e-8)

        pbc = pd.read_csv(out / "spectrum_pbc.csv")
        assert np.abs(pbc["im_E"]).max() <= 1e-10

    def test_workers_do_not_change_results(self, write_config, tmp_path):
        config = write_config(spectrum_config())
        serial, pooled = tmp_path / "serial", tmp_path / "pooled"
        assert main(["spectrum", "--config", config, "--out", str(serial), "--workers", "1"]) == EXIT_OK
        assert main(["spectrum", "--config", config, "--out", str(pooled), "--workers", "2"]) == EXIT_OK
        for name in ("spectrum.csv", "p_com.csv", "spectrum_summary.json"):
            assert (serial / name).read_bytes() == (pooled / name).read_bytes(), name

    def test_only_requested_observables_are_written(self, write_config, tmp_path):
        out = tmp_path / "p_com_only"
        config = write_config(spectrum_config(observables=["p_com"]))
        assert main(["spectrum", "--config", config, "--out", str(out)]) == EXIT_OK
        assert (out / "p_com.csv").exists()
        for name in ("spectrum.csv", "spectrum_pbc.csv", "spectrum.html", "spectrum.svg", "bandwidth.csv"):
            assert not (out / name).exists(), name
        assert json.loads((out / "spectrum_summary.json").read_text())["points"] == 13


class TestConfigErrors:

    def test_unknown_model(self, write_config, tmp_path):
        config = write_config(spectrum_config(model="kagome"))
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        assert main(["spectrum", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG

    def test_unknown_key(self, write_config, tmp_path):
        config = write_config(spectrum_config(lambda_max=4.0))
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["spectrum", "--config", str(path)]) == EXIT_CONFIG

    def test_trajectory_needs_scan_parameter(self, write_config, tmp_path):
        config = write_config(spectrum_config(sweep={"parameter": "N", "start": 4, "stop": 8, "steps": 3}))
        assert main(["trajectory", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_worker_count(self, write_config, tmp_path):
        config = write_config(spectrum_config())
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out"), "--workers", "0"]) == EXIT_CONFIG

    def test_unknown_observable(self, write_config, tmp_path):
        config = write_config(spectrum_config(observables=["entropy"]))
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_model_too_small_for_its_couplings(self, write_config, tmp_path):
        config = write_config({"model": "type1", "params": {"N": 2}})
        assert main(["validate-model", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_unknown_sweep_parameter(self, write_config, tmp_path):
        config = write_config(spectrum_config(sweep={"parameter": "mu", "start": 0.0, "stop": 1.0, "steps": 3}))
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_spectrum_needs_sweep(self, write_config, tmp_path):
        config = write_config({"model": "minimal", "params": {"N": 6}})
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG


class TestValidateModel:

    def test_type2_passes(self, write_config, tmp_path, capsys):
        config = write_config({"model": "type2", "params": {"t1": 1.0, "t2": 0.5, "N": 12}, "k_samples": 9})
        out = tmp_path / "audit"
        assert main(["validate-model", "--config", config, "--out", str(out)]) == EXIT_OK
        assert json.loads((out / "audit.json").read_text())["all_passed"] is True
        assert "Type-II" in capsys.readouterr().out

    def test_failed_conditions_still_exit_ok(self, write_config, tmp_path):
        config = write_config({"model": "minimal", "parity": "identity", "params": {"lam": 1.0, "N": 8}})
        out = tmp_path / "audit"
        assert main(["validate-model", "--config", config, "--out", str(out)]) == EXIT_OK
        assert json.loads((out / "audit.json").read_text())["all_passed"] is False

    def test_overflow_is_numerical_failure(self, write_config, tmp_path):
        config = write_config({"model": "minimal", "params": {"lam": 1e200, "N": 6}})
        assert main(["validate-model", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_NUMERICAL

    def test_overflowing_sweep_is_numerical_failure(self, write_config, tmp_path):
        config = write_config(spectrum_config(
            params={"lam": 1e200, "N": 6}, sweep={"parameter": "T", "start": 1.0, "stop": 2.0, "steps": 3},
        ))
        assert main(["spectrum", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_NUMERICAL


class TestOtherRuns:

    def test_list_models(self, capsys):
        assert main(["list-models"]) == EXIT_OK
        output = capsys.readouterr().out
        assert "minimal" in output and "type2" in output

    def test_trajectory(self, write_config, tmp_path):
        config = write_config(spectrum_config(params={"N": 4}, sweep={"parameter": "lam", "start": 0.1, "stop": 2.5, "steps": 9}))
        out = tmp_path / "trajectory"
        assert main(["trajectory", "--config", config, "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "trajectory.json").read_text())
        assert summary["points"] == 9

    def test_phase_diagram(self, write_config, tmp_path):
        config = write_config(spectrum_config(
            sweep={"parameter": "lam", "start": 1.0, "stop": 3.0, "steps": 5},
            sizes=[4, 6],
            bracket=[1.0, 3.0],
        ))
        out = tmp_path / "phase"
        assert main(["phase-diagram", "--config", config, "--out", str(out)]) == EXIT_OK
        grid = pd.read_csv(out / "phase_grid.csv")
        assert len(grid) == 10
        thresholds = pd.read_csv(out / "thresholds.csv")
        assert ((thresholds["threshold"] > np.pi / 2.0) & (thresholds["threshold"] < 3.0)).all()

    def test_scale_free(self, write_config, tmp_path):
        config = write_config({"model": "minimal", "params": {"lam": 3.0}, "sizes": [10, 20], "envelope_states": 2})
        out = tmp_path / "scale_free"
        assert main(["scale-free", "--config", config, "--out", str(out)]) == EXIT_OK
        assert len(pd.read_csv(out / "scaling.csv")) == 2
        assert "slope" in json.loads((out / "scale_free.json").read_text())

    def test_scale_free_needs_two_sizes(self, write_config, tmp_path):
        config = write_config({"model": "minimal", "params": {"lam": 3.0}, "sizes": [10]})
        assert main(["scale-free", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_perturbation(self, write_config, tmp_path):
        config = write_config({"model": "minimal", "params": {"lam": 3.0, "N": 16}, "sizes": [16, 24]})
        out = tmp_path / "perturbation"
        assert main(["perturbation", "--config", config, "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "perturbation.json").read_text())
        assert summary["cutoff"] == 4
        assert summary["convergence_bound"] == pytest.approx(np.pi / 2.0)
        assert (out / "gamma.csv").exists()
        heatmap = pd.read_csv(out / "heatmap.csv")
        assert list(heatmap.columns) == ["site_i", "site_j", "abs_V", "abs_V_nonhermitian"]
