"""
Subcommands driven through main() with JSON configs written to tmp_path.
"""

import json
import math

import pandas as pd
import pytest

from spde_engine.config.run_config import RunConfig
from spde_engine.core.cli import main
from spde_engine.reporting.export import load_trajectory_block

HEAT = {"problem": {"catalog": "heat"}, "grid": {"points": 32}, "time": {"T": 0.01, "record_every": 16}}


def _write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestRun:
    def test_heat_run_matches_fourier_decay(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", "--config", _write_config(tmp_path, HEAT), "--out", str(out), "--reproducible"]) == 0
        norms = pd.read_csv(out / "norms.csv")
        assert list(norms.columns) == ["time", "step", "mass", "l1", "l2", "max_abs"]
        final = norms.iloc[-1]
        assert final["time"] == pytest.approx(0.01)
        assert final["l2"] == pytest.approx(math.exp(-4.0 * math.pi ** 2 * 0.01) / math.sqrt(2.0), rel=1e-3)
        assert abs(final["mass"]) < 1e-12

    def test_trajectory_files_describe_themselves(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", "--config", _write_config(tmp_path, HEAT), "--out", str(out)]) == 0
        sidecar = json.loads((out / "trajectory.json").read_text())
        metadata = sidecar["metadata"]
        assert "generated_at" in metadata
        assert RunConfig.from_dict(metadata["config"]) == RunConfig.from_dict(HEAT)
        block = load_trajectory_block(out / "trajectory.json")
        assert block.shape[1:] == (32,)
        frame = pd.read_csv(out / "trajectory.csv")
        assert len(frame) == block.size

    def test_reproducible_outputs_are_byte_identical(self, tmp_path):
        config = _write_config(tmp_path, {**HEAT, "problem": {"catalog": "degenerate-multiplicative", "modes": 4}})
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            assert main(["run", "--config", config, "--out", str(out), "--reproducible", "--seed", "11"]) == 0
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_seed_changes_the_noise(self, tmp_path):
        config = _write_config(tmp_path, {**HEAT, "problem": {"catalog": "degenerate-multiplicative", "modes": 4}})
        for seed in ("1", "2"):
            assert main(["run", "--config", config, "--out", str(tmp_path / seed), "--reproducible", "--seed", seed]) == 0
        assert (tmp_path / "1" / "trajectory.f64").read_bytes() != (tmp_path / "2" / "trajectory.f64").read_bytes()


class TestErrors:
    def test_config_error_exits_two_with_field_path(self, tmp_path, capsys):
        out = tmp_path / "out"
        config = _write_config(tmp_path, {"grid": {"size": 16}})
        assert main(["run", "--config", config, "--out", str(out)]) == 2
        error = json.loads((out / "error.json").read_text())
        assert error["details"]["field_path"] == "grid.size"
        assert error["command"] == "run"
        assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["exit_code"] == 2

    def test_blow_up_exits_three_with_step_index(self, tmp_path):
        out = tmp_path / "out"
        data = {
            "problem": {"catalog": "burgers", "options": {"initial": {"kind": "sine", "amplitude": 50.0}}},
            "grid": {"points": 32},
            "time": {"T": 4.0, "dt": 0.125},
            "experiment": {"state_range": 0.1},
        }
        assert main(["run", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 3
        error = json.loads((out / "error.json").read_text())
        assert error["error_type"] == "BLOW_UP"
        assert 0 <= error["details"]["step_index"] < 32

    def test_missing_config_path(self, tmp_path, monkeypatch):
        monkeypatch.delenv("SPDE_ENGINE_CONFIG_PATH", raising=False)
        assert main(["audit", "--out", str(tmp_path / "out")]) == 2

    def test_unknown_subcommand_is_a_usage_error(self):
        with pytest.raises(SystemExit):
            main(["simulate"])


class TestSubcommands:
    def test_audit_on_degenerate_burgers(self, tmp_path, monkeypatch):
        data = {
            "problem": {"catalog": "burgers-degenerate"},
            "grid": {"points": 32},
            "experiment": {"audit_samples": 512},
        }
        monkeypatch.setenv("SPDE_ENGINE_CONFIG_PATH", _write_config(tmp_path, data))
        monkeypatch.setenv("SPDE_ENGINE_OUT_DIR", str(tmp_path / "env-out"))
        assert main(["audit", "--reproducible"]) == 0
        report = json.loads((tmp_path / "env-out" / "audit.json").read_text())["report"]
        assert report["passed"] is True
        assert (tmp_path / "env-out" / "audit.csv").exists()

    def test_contraction_with_equal_initial_data(self, tmp_path):
        data = {
            "problem": {"catalog": "degenerate-multiplicative", "modes": 4},
            "grid": {"points": 32},
            "time": {"T": 0.01},
            "regularization": {"tau": 0.01},
            "ensemble": {"members": 8, "threads": 2},
            "experiment": {"initial_b": {"kind": "sine"}},
        }
        out = tmp_path / "out"
        assert main(["contraction", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 0
        report = json.loads((out / "contraction.json").read_text())["report"]
        assert report["summary"]["initial_l1"] == 0.0
        assert report["summary"]["passed"] is True
        frame = pd.read_csv(out / "contraction.csv")
        assert (frame.loc[frame["quantity"] == "ratio", "mean"] == 0.0).all()

    def test_contraction_requires_second_profile(self, tmp_path):
        data = {"problem": {"catalog": "burgers-degenerate"}, "grid": {"points": 32}, "ensemble": {"members": 8}}
        out = tmp_path / "out"
        assert main(["contraction", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 2
        assert json.loads((out / "error.json").read_text())["details"]["field_path"] == "experiment.initial_b"

    def test_cascade_needs_a_viscosity_list(self, tmp_path):
        out = tmp_path / "out"
        assert main(["cascade", "--config", _write_config(tmp_path, HEAT), "--out", str(out)]) == 2

    def test_cascade_writes_distances(self, tmp_path):
        data = {**HEAT, "regularization": {"tau_list": [0.1, 0.01, 0.001]}, "ensemble": {"members": 2}}
        out = tmp_path / "out"
        assert main(["cascade", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 0
        frame = pd.read_csv(out / "cascade.csv")
        assert set(frame["quantity"]) == {"distance"}
        assert len(frame) == 3

    def test_ito_check_runs(self, tmp_path):
        data = {
            "problem": {"catalog": "additive-heat", "modes": 2},
            "grid": {"points": 16},
            "time": {"T": 0.01},
            "ensemble": {"members": 4},
            "experiment": {"phi": {"type": "phi-n", "n": 4.0, "p": 2.0}},
        }
        out = tmp_path / "out"
        assert main(["ito-check", "--config", _write_config(tmp_path, data), "--out", str(out), "--threads", "2"]) == 0
        assert (out / "ito-check.json").exists()
        summary = json.loads((out / "ito-check.json").read_text())["report"]["summary"]
        assert summary["ito_correction_included"] is True

    def test_ito_check_can_drop_the_correction(self, tmp_path):
        data = {
            "problem": {"catalog": "additive-heat", "modes": 2},
            "grid": {"points": 16},
            "time": {"T": 0.01},
            "ensemble": {"members": 4},
            "experiment": {"ito_correction": False},
        }
        out = tmp_path / "out"
        assert main(["ito-check", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 0
        report = json.loads((out / "ito-check.json").read_text())["report"]
        assert report["summary"]["ito_correction_included"] is False
        rows = [r for r in report["rows"] if r["quantity"] == "ito_correction"]
        assert rows[0]["mean"] == 0.0

    def test_kinetic_check_exports_measures(self, tmp_path):
        data = {
            "problem": {"catalog": "burgers-degenerate"},
            "grid": {"points": 32},
            "time": {"T": 0.005},
            "regularization": {"tau": 0.01},
            "ensemble": {"members": 1},
            "experiment": {"xi_width": 2.0, "test_functions": [0, 1]},
        }
        out = tmp_path / "out"
        assert main(["kinetic-check", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 0
        assert (out / "kinetic_measures.csv").exists()
        assert (out / "kinetic-check.csv").exists()
