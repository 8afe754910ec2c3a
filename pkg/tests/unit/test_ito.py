import math

import numpy as np
import pytest

from spde_engine.analytics.ito import PhiN, build_test_profile, ito_residual, ito_residual_terms
from spde_engine.core.solver import solve
from spde_engine.data.noise import sample_path, zero_path
from spde_engine.models.coefficients import AbsValue, Affine, Quadratic
from spde_engine.models.grid import TorusGrid
from spde_engine.models.regularization import RegularizationParams
from spde_engine.models.test_functions import SpatialWeight, TrigonometricMode
from spde_engine.utils.exceptions import ConfigValidationError, DomainError, PreconditionError


def _heat_run(heat_spec, dt, T=0.01):
    grid = TorusGrid(dim=1, points=32)
    params = RegularizationParams(dt=dt, T=T)
    path = zero_path(params.steps, params.dt)
    return solve(heat_spec, grid, params, path, record_every=1), path


class TestPhiN:
    def test_matches_power_inside(self):
        phi = PhiN(n=3.0, p=3.0)
        assert float(phi.value(-2.0)) == pytest.approx(8.0)
        assert float(phi.derivative(2.0)) == pytest.approx(12.0)
        assert phi.curvature_bound() == pytest.approx(18.0)

    def test_rejects_invalid_exponent(self):
        with pytest.raises(DomainError):
            PhiN(n=2.0, p=1.5)

    def test_build_from_dict(self):
        phi = build_test_profile({"type": "phi-n", "n": 2.0, "p": 4.0})
        assert isinstance(phi, PhiN)
        assert phi.to_dict() == {"type": "phi-n", "n": 2.0, "p": 4.0}
        assert isinstance(build_test_profile({"type": "quadratic", "scale": 1.0}), Quadratic)

    def test_invalid_dict_reports_path(self):
        with pytest.raises(ConfigValidationError) as err:
            build_test_profile({"type": "phi-n", "n": 0.0})
        assert err.value.field_path == "experiment.phi"


class TestItoResidual:
    def test_linear_profile_balances_exactly(self, stochastic_spec, grid_1d):
        params = RegularizationParams(dt=1e-4, T=0.005, tau=0.01)
        path = sample_path(17, params.steps, params.dt, stochastic_spec.modes)
        traj = solve(stochastic_spec, grid_1d, params, path, record_every=1)
        terms = ito_residual_terms(traj, stochastic_spec, path, Affine(1.0, 0.0))
        assert terms["ito_correction"] == 0.0
        assert terms["stochastic"] != 0.0
        assert abs(terms["defect"]) < 1e-10

    def test_deterministic_run_has_no_stochastic_terms(self, heat_spec):
        traj, path = _heat_run(heat_spec, 1e-4)
        terms = ito_residual_terms(traj, heat_spec, path, Quadratic(0.5))
        assert terms["stochastic"] == 0.0 and terms["ito_correction"] == 0.0
        assert terms["lhs"] < 0.0
        assert terms["drift"] < 0.0

    def test_time_discretization_defect_is_first_order(self, heat_spec):
        coarse_traj, coarse_path = _heat_run(heat_spec, 1e-4)
        coarse = ito_residual(coarse_traj, heat_spec, coarse_path, Quadratic(0.5))
        fine_traj, fine_path = _heat_run(heat_spec, 5e-5)
        fine = ito_residual(fine_traj, heat_spec, fine_path, Quadratic(0.5))
        assert coarse > 0.0
        assert fine < 0.6 * coarse

    def test_signed_residual(self, heat_spec):
        traj, path = _heat_run(heat_spec, 1e-4)
        signed = ito_residual(traj, heat_spec, path, Quadratic(0.5), signed=True)
        assert ito_residual(traj, heat_spec, path, Quadratic(0.5)) == pytest.approx(abs(signed))

    def test_split_drift_with_spatial_weight(self, heat_spec):
        traj, path = _heat_run(heat_spec, 1e-4)
        psi = SpatialWeight(TrigonometricMode(wavevector=(1,), phase=0.0))
        terms = ito_residual_terms(traj, heat_spec, path, Quadratic(0.5), psi=psi, drift="split")
        assert terms["drift_form"] == "split"
        assert math.isfinite(terms["defect"])
        assert np.isfinite(terms["drift"])

    def test_unbounded_curvature_rejected(self, heat_spec):
        traj, path = _heat_run(heat_spec, 1e-4)
        with pytest.raises(PreconditionError):
            ito_residual(traj, heat_spec, path, AbsValue())

    def test_unknown_drift_form(self, heat_spec):
        traj, path = _heat_run(heat_spec, 1e-4)
        with pytest.raises(DomainError):
            ito_residual(traj, heat_spec, path, Quadratic(0.5), drift="midpoint")
