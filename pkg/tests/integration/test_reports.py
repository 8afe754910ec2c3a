"""
End-to-end ensemble reports on small grids. Desk-scale ensembles are
marked slow.
"""

import math

import numpy as np
import pytest

from spde_engine.analytics.ito import PhiN
from spde_engine.core.cascade import cascade_tau
from spde_engine.core.diagnostics_runner import (
    cascade_report,
    contraction_report,
    energy_report,
    ito_report,
    kinetic_report,
    regularity_report,
)
from spde_engine.core.solver import stability_bound
from spde_engine.data.noise import zero_path
from spde_engine.models.coefficients import Quadratic
from spde_engine.models.grid import ScalarField, TorusGrid
from spde_engine.models.problem import InitialProfile, catalog_problem
from spde_engine.models.regularization import RegularizationParams
from spde_engine.utils.exceptions import DomainError, PreconditionError

TAUS = (0.1, 0.01, 0.001)


def _params(spec, grid, T, tau=0.0):
    steps = max(1, math.ceil(T / stability_bound(spec, grid)))
    return RegularizationParams(dt=T / steps, T=T, tau=tau)


class TestEnergy:
    def test_heat_energy_is_flat_across_viscosities(self, grid_1d, heat_spec):
        params_list = [_params(heat_spec, grid_1d, 0.02, tau) for tau in TAUS]
        report = energy_report(spec=heat_spec, grid=grid_1d, params_list=params_list, members=2, record_every=4)
        assert report.passed is True
        assert report.summary["flatness"] == pytest.approx(1.0)
        ratios = report.select("bound_ratio")["mean"]
        assert np.all(ratios <= 1.0)

    def test_rejects_small_exponent(self, grid_1d, heat_spec):
        with pytest.raises(DomainError):
            energy_report(spec=heat_spec, grid=grid_1d, params_list=[_params(heat_spec, grid_1d, 0.01)], p=1.5)

    def test_tau_list_must_span_a_decade(self, grid_1d, heat_spec):
        params_list = [_params(heat_spec, grid_1d, 0.01, tau) for tau in (0.1, 0.05)]
        with pytest.raises(PreconditionError):
            energy_report(spec=heat_spec, grid=grid_1d, params_list=params_list, members=2)

    @pytest.mark.slow
    def test_stochastic_energy_is_uniform_in_viscosity(self):
        spec = catalog_problem("degenerate-multiplicative", modes=8)
        grid = TorusGrid(dim=1, points=64)
        params_list = [_params(spec, grid, 0.1, tau) for tau in TAUS]
        report = energy_report(spec=spec, grid=grid, params_list=params_list, members=32, seed=1, record_every=8)
        assert report.passed is True


class TestContraction:
    def test_monotone_deterministic_run_contracts(self, grid_1d, degenerate_spec):
        params = _params(degenerate_spec, grid_1d, 0.05, tau=0.01)
        u0_a = InitialProfile("sine", {"amplitude": 1.0}).field(grid_1d)
        u0_b = InitialProfile("bump", {"amplitude": 0.5}).field(grid_1d)
        report = contraction_report(
            spec=degenerate_spec, grid=grid_1d, params=params, u0_a=u0_a, u0_b=u0_b, members=8
        )
        assert report.passed is True
        ratios = report.select("ratio")["mean"].to_numpy()
        assert ratios[0] == pytest.approx(1.0)
        assert np.all(ratios <= 1.0 + 1e-12)
        assert report.summary["c_disc"] <= 1e-12

    def test_identical_data_give_zero_ratio(self, grid_1d, stochastic_spec):
        params = _params(stochastic_spec, grid_1d, 0.02, tau=0.01)
        u0 = stochastic_spec.initial_field(grid_1d)
        report = contraction_report(spec=stochastic_spec, grid=grid_1d, params=params, u0_a=u0, u0_b=u0, members=8)
        assert report.summary["initial_l1"] == 0.0
        assert np.all(report.select("ratio")["mean"] == 0.0)
        assert report.passed is True

    def test_small_ensembles_are_refused(self, grid_1d, stochastic_spec):
        params = _params(stochastic_spec, grid_1d, 0.02)
        u0 = stochastic_spec.initial_field(grid_1d)
        with pytest.raises(PreconditionError):
            contraction_report(spec=stochastic_spec, grid=grid_1d, params=params, u0_a=u0, u0_b=u0, members=4)

    @pytest.mark.slow
    def test_common_noise_contraction(self):
        spec = catalog_problem("degenerate-multiplicative", modes=8)
        grid = TorusGrid(dim=1, points=128)
        params = _params(spec, grid, 0.1, tau=0.001)
        u0_a = InitialProfile("sine", {"amplitude": 1.0}).field(grid)
        u0_b = InitialProfile("riemann", {"left": 0.5, "right": -0.5}).field(grid)
        report = contraction_report(
            spec=spec, grid=grid, params=params, u0_a=u0_a, u0_b=u0_b, members=64, seed=3,
            output_times=[0.025, 0.05, 0.1], threads=4,
        )
        assert report.passed is True


class TestCascade:
    def test_heat_distances_shrink_with_viscosity(self, grid_1d, heat_spec):
        params = _params(heat_spec, grid_1d, 0.05)
        report = cascade_report(spec=heat_spec, grid=grid_1d, tau_list=TAUS, dt=params.dt, T=params.T, members=2)
        consecutive = report.summary["consecutive_means"]
        assert consecutive[0] > consecutive[1] > 0.0
        assert report.passed is True
        assert len(report.select("distance")) == 3

    def test_common_noise_distances_shrink_within_standard_errors(self, grid_1d, stochastic_spec):
        params = _params(stochastic_spec, grid_1d, 0.05)
        report = cascade_report(
            spec=stochastic_spec, grid=grid_1d, tau_list=TAUS, dt=params.dt, T=params.T, members=16, seed=4,
        )
        increase = report.summary["consecutive_increase"][0]
        assert increase["count"] == 16
        assert increase["standard_error"] > 0.0
        assert increase["mean"] < 0.0
        consecutive = report.summary["consecutive_means"]
        assert consecutive[0] > consecutive[1] > 0.0
        assert report.passed is True
        assert np.all(report.select("distance")["standard_error"] > 0.0)

    @pytest.mark.slow
    def test_desk_scale_stochastic_cascade(self):
        spec = catalog_problem("degenerate-multiplicative", modes=8)
        grid = TorusGrid(dim=1, points=128)
        params = _params(spec, grid, 0.1)
        report = cascade_report(
            spec=spec, grid=grid, tau_list=TAUS, dt=params.dt, T=params.T, members=32, seed=5, threads=4,
        )
        assert report.passed is True

    def test_repeated_viscosity_has_zero_distance(self, grid_1d, heat_spec):
        params = _params(heat_spec, grid_1d, 0.02)
        result = cascade_tau(heat_spec, grid_1d, (0.01, 0.01), zero_path(params.steps, params.dt), None, params.T)
        assert result.distances[0, 1] == 0.0

    def test_increasing_list_rejected(self, grid_1d, heat_spec):
        params = _params(heat_spec, grid_1d, 0.02)
        with pytest.raises(DomainError):
            cascade_tau(heat_spec, grid_1d, (0.001, 0.01), zero_path(params.steps, params.dt), None, params.T)


class TestRegularity:
    def test_deterministic_seminorms_are_uniform(self, grid_1d, heat_spec):
        params_list = [_params(heat_spec, grid_1d, 0.02, tau) for tau in TAUS]
        report = regularity_report(spec=heat_spec, grid=grid_1d, params_list=params_list, members=2)
        assert report.summary["s"] == pytest.approx(0.25)
        assert report.passed is True
        assert len(report.select("seminorm_s")) == 2 * len(TAUS)
        fit = report.summary["seminorm_fit"]
        assert fit["corpus_size"] > 0
        assert fit["rho_over_p"] > 0.0

    def test_riemann_data_with_degenerate_diffusion(self, degenerate_spec):
        sups = []
        for points in (32, 64):
            grid = TorusGrid(dim=1, points=points)
            params_list = [_params(degenerate_spec, grid, 0.05, tau) for tau in TAUS]
            report = regularity_report(spec=degenerate_spec, grid=grid, params_list=params_list, members=2)
            assert report.summary["s"] == pytest.approx(0.25)
            assert report.summary["flatness"] <= 2.0
            assert report.passed is True
            sups.append(np.array(report.summary["sup_t_mean"]))
        ratios = sups[1] / sups[0]
        assert np.all(ratios <= 2.0) and np.all(ratios >= 0.5), ratios

    def test_s_above_exponent_rejected(self, grid_1d, heat_spec):
        params_list = [_params(heat_spec, grid_1d, 0.02)]
        with pytest.raises(PreconditionError):
            regularity_report(spec=heat_spec, grid=grid_1d, params_list=params_list, s=0.75, members=2)


class TestKinetic:
    def test_deterministic_report(self, grid_1d, degenerate_spec):
        params = _params(degenerate_spec, grid_1d, 0.02, tau=0.01)
        report = kinetic_report(
            spec=degenerate_spec, grid=grid_1d, params=params, xi_width=2.0, tail_R=0.5,
            chain_profile=Quadratic(0.5),
        )
        assert report.passed is None
        residuals = report.select("kinetic_residual")
        assert residuals["test_function"].tolist() == [0, 1, 2]
        assert np.all(np.isfinite(residuals["mean"]))
        assert float(report.select("n1_mass")["mean"].iloc[0]) >= 0.0
        assert report.artifacts["measures"] is not None

    def test_stochastic_report_gives_a_verdict(self, grid_1d, stochastic_spec):
        params = _params(stochastic_spec, grid_1d, 0.01, tau=0.01)
        report = kinetic_report(
            spec=stochastic_spec, grid=grid_1d, params=params, members=4, xi_width=3.0, test_indices=(0,)
        )
        assert report.summary["passed"] in (True, False)
        assert "passed" in report.select("kinetic_residual").columns


class TestIto:
    def test_additive_noise_from_rest(self):
        spec = catalog_problem("additive-heat", modes=4)
        grid = TorusGrid(dim=1, points=16)
        params = _params(spec, grid, 0.05)
        report = ito_report(spec=spec, grid=grid, params=params, phi=Quadratic(1.0), members=64, seed=2)
        assert report.passed is True
        assert report.summary["correction_required"] is True
        assert report.summary["correction_separation"] >= 10.0

    def test_dropping_the_correction_breaks_the_balance(self):
        spec = catalog_problem("additive-heat", modes=4)
        grid = TorusGrid(dim=1, points=16)
        params = _params(spec, grid, 0.05)
        report = ito_report(
            spec=spec, grid=grid, params=params, phi=Quadratic(1.0), members=64, seed=2,
            include_ito_correction=False,
        )
        assert report.summary["ito_correction_included"] is False
        assert float(report.select("ito_correction")["mean"].iloc[0]) == 0.0
        defect = report.select("defect")["mean"].iloc[0]
        assert defect == pytest.approx(report.select("defect_without_correction")["mean"].iloc[0])
        assert report.passed is False

    def test_deterministic_runs_report_magnitudes(self, grid_1d, heat_spec):
        params = _params(heat_spec, grid_1d, 0.01)
        report = ito_report(spec=heat_spec, grid=grid_1d, params=params, phi=PhiN(n=4.0, p=2.0), members=2)
        assert report.passed is None
        assert report.summary["max_abs_defect"] >= 0.0

    def test_constant_state_has_no_drift(self, grid_1d):
        spec = catalog_problem("additive-heat", modes=2)
        params = _params(spec, grid_1d, 0.01)
        u0 = ScalarField.constant(grid_1d, 0.25)
        report = ito_report(spec=spec, grid=grid_1d, params=params, phi=Quadratic(0.5), members=2, u0=u0)
        assert float(report.select("drift")["mean"].iloc[0]) == pytest.approx(0.0, abs=1e-12)
