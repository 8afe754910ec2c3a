import json
import math
import threading
import time

import numpy as np
import pytest

from spde_engine.core.ensemble_runner import member_path, run_ensemble
from spde_engine.data.run_store import build_config_hash, canonical_json, normalize_for_json
from spde_engine.models.regularization import RegularizationParams, Scheme
from spde_engine.utils.exceptions import BlowUpError, ConfigValidationError, DomainError, SpdeEngineError
from spde_engine.utils.logger import ProgressLogger, log_performance, setup_logger


class TestEnsembleRunner:
    def test_results_in_member_order(self):
        run = run_ensemble(lambda m: m * m, members=6)
        assert run.results == [0, 1, 4, 9, 16, 25]
        assert run.members == 6
        assert run.excluded == []

    def test_threads_do_not_change_results(self):
        params = RegularizationParams(dt=0.01, T=0.2)

        def task(member):
            time.sleep(0.001 * (5 - member % 5))
            return float(member_path(3, member, params, 2).increments.sum())

        serial = run_ensemble(task, members=10, threads=1)
        threaded = run_ensemble(task, members=10, threads=4)
        assert serial.results == threaded.results

    def test_blow_up_excludes_member(self):
        def task(member):
            if member in (1, 3):
                raise BlowUpError(step_index=7 + member)
            return member

        run = run_ensemble(task, members=5, threads=2)
        assert run.results == [0, None, 2, None, 4]
        assert run.completed == [0, 2, 4]
        assert run.excluded == [{"member": 1, "step_index": 8}, {"member": 3, "step_index": 10}]

    def test_other_errors_propagate(self):
        def task(member):
            raise DomainError("member", member, "never")

        with pytest.raises(DomainError):
            run_ensemble(task, members=3)

    def test_threads_actually_overlap(self):
        barrier = threading.Barrier(2, timeout=5)
        run = run_ensemble(lambda m: barrier.wait() >= 0, members=2, threads=2)
        assert run.completed == [True, True]

    def test_member_paths_cover_the_run(self):
        params = RegularizationParams(dt=0.05, T=1.0)
        path = member_path(1, 4, params, 3)
        assert path.steps == params.steps
        assert path.modes == 3


class TestRunStore:
    def test_canonical_json_is_sorted_and_compact(self):
        text = canonical_json({"b": 1, "a": (1.5, np.float64(2.0)), "c": np.array([1, 2])})
        assert text == '{"a":[1.5,2.0],"b":1,"c":[1,2]}'

    def test_non_finite_floats_become_null(self):
        assert json.loads(canonical_json({"x": math.nan, "y": math.inf, "z": -math.inf})) == {
            "x": None,
            "y": None,
            "z": None,
        }

    def test_enums_and_numpy_scalars(self):
        assert normalize_for_json({"s": Scheme.ETA, "i": np.int64(3), "b": np.bool_(True)}) == {
            "b": True,
            "i": 3,
            "s": Scheme.ETA.value,
        }

    def test_hash_ignores_key_order(self):
        first = build_config_hash({"grid": {"points": 32, "dim": 1}, "seed": 5})
        second = build_config_hash({"seed": 5, "grid": {"dim": 1, "points": 32}})
        assert first == second
        assert len(first) == 64
        assert build_config_hash({"seed": 6, "grid": {"dim": 1, "points": 32}}) != first


class TestErrors:
    def test_config_error_payload(self):
        exc = ConfigValidationError("grid.points", "must be >= 4")
        payload = exc.to_dict()
        assert payload["exit_code"] == 2
        assert payload["error_type"] == "CONFIG_VALIDATION"
        assert payload["details"]["field_path"] == "grid.points"
        assert isinstance(exc, SpdeEngineError)

    def test_blow_up_payload_is_json_ready(self):
        exc = BlowUpError(step_index=np.int64(12))
        payload = exc.to_dict()
        assert payload["exit_code"] == 3
        assert json.dumps(payload)

    def test_domain_error_is_a_value_error(self):
        with pytest.raises(ValueError):
            raise DomainError("eta", 2.0, "0 < eta < 1")


class TestLogging:
    def test_file_handler_and_performance(self, tmp_path):
        logger = setup_logger("spde_engine.tests.runtime", console_level=50, log_dir=str(tmp_path))

        @log_performance(logger)
        def work(x):
            return 2 * x

        assert work(4) == 8
        progress = ProgressLogger(logger, 3, "members")
        for _ in range(3):
            progress.step()
        progress.complete()
        text = "".join(p.read_text() for p in tmp_path.glob("*.log"))
        assert "Completed work" in text
        assert "members COMPLETED" in text

    def test_failures_are_logged_and_reraised(self, tmp_path):
        logger = setup_logger("spde_engine.tests.runtime_fail", console_level=50, log_dir=str(tmp_path))

        @log_performance(logger)
        def broken():
            raise DomainError("x", 1, "never")

        with pytest.raises(DomainError):
            broken()
        assert "Failed broken" in "".join(p.read_text() for p in tmp_path.glob("*.log"))
