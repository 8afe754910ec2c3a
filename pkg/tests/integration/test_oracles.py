"""
Solver runs against closed-form solutions: Fourier decay of the heat
equation and the shock speed of a Burgers Riemann problem.
"""

import math

import numpy as np
import pytest

from spde_engine.core.solver import solve, stability_bound
from spde_engine.data.noise import zero_path
from spde_engine.models.grid import TorusGrid
from spde_engine.models.problem import catalog_problem
from spde_engine.models.regularization import RegularizationParams


def _stable_run(spec, points, T, tau=0.0):
    grid = TorusGrid(dim=1, points=points)
    bound = stability_bound(spec, grid)
    steps = max(1, math.ceil(T / bound))
    params = RegularizationParams(dt=T / steps, T=T, tau=tau)
    return solve(spec, grid, params, zero_path(params.steps, params.dt)), grid


def _heat_error(points, T=0.1):
    traj, grid = _stable_run(catalog_problem("heat"), points, T)
    exact = math.exp(-4.0 * math.pi ** 2 * T) * np.sin(2.0 * math.pi * grid.coordinates()[0])
    return math.sqrt(float(np.sum((traj.final.values - exact) ** 2)) * grid.cell_volume)


class TestHeatDecay:
    def test_coarse_grid_error(self):
        assert _heat_error(64) <= 1e-3

    @pytest.mark.slow
    def test_fine_grid_error_and_order(self):
        errors = [_heat_error(m) for m in (64, 128, 256)]
        assert errors[-1] <= 1e-3
        orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
        assert min(orders) >= 1.9, orders


class TestRankineHugoniot:
    def test_shock_travels_at_half_speed(self):
        spec = catalog_problem("burgers")
        T = 0.25
        traj, grid = _stable_run(spec, 256, T, tau=1e-3)
        x = grid.coordinates()[0]
        u = traj.final.values
        window = np.flatnonzero((x > 0.4) & (x < 0.9))
        crossings = [i for i in window if u[i] >= 0.5 > u[i + 1]]
        assert len(crossings) == 1
        i = crossings[0]
        front = x[i] + grid.h * (u[i] - 0.5) / (u[i] - u[i + 1])
        # jump of the initial data sits halfway between the last 1-cell and the first 0-cell
        x0 = 0.5 - 0.5 * grid.h
        assert abs(front - (x0 + 0.5 * T)) <= 2.0 * grid.h

    def test_mass_is_conserved_through_the_shock(self):
        spec = catalog_problem("burgers")
        traj, _ = _stable_run(spec, 128, 0.25, tau=1e-3)
        assert traj.final.total() == pytest.approx(traj.initial.total(), abs=1e-10)
