"""
Vanishing-Viscosity Cascade
===========================
Solutions u^τ for a list of viscosities, all driven by one noise path, and
their pairwise distances

    d(τ, σ) = ∫₀^T ‖u^τ(t) − u^σ(t)‖_{L¹} dt      (trapezoid over snapshots)
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np

from spde_engine.analytics.metrics.norms import trapezoid_weights
from spde_engine.core.solver import solve
from spde_engine.models.grid import ScalarField, TorusGrid, Trajectory
from spde_engine.models.problem import ProblemSpec
from spde_engine.models.regularization import RegularizationParams, Scheme
from spde_engine.models.results import CascadeResult
from spde_engine.data.noise import NoisePath
from spde_engine.utils.exceptions import DomainError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)

# Snapshots per cascade member when no stride is given
DEFAULT_SNAPSHOTS = 64


def l1_in_time(first: Trajectory, second: Trajectory) -> float:
    """∫ ‖u − v‖_{L¹} dt over the shared snapshot times."""
    if first.grid != second.grid or not np.array_equal(first.times, second.times):
        raise DomainError("trajectories", "different grids or snapshot times", "common grid and times")
    axes = tuple(range(1, first.snapshots.ndim))
    per_time = np.sum(np.abs(first.snapshots - second.snapshots), axis=axes) * first.grid.cell_volume
    return float(np.dot(trapezoid_weights(first.times), per_time))


def cascade_params(
    path: NoisePath,
    t_end: float,
    tau: float,
    R: float = math.inf,
) -> RegularizationParams:
    return RegularizationParams(dt=path.dt, T=t_end, R=R, tau=float(tau), scheme=Scheme.TAU)


def cascade_tau(
    spec: ProblemSpec,
    grid: TorusGrid,
    tau_list: Sequence[float],
    path: NoisePath,
    u0: Optional[ScalarField],
    t_end: float,
    R: float = math.inf,
    record_every: Optional[int] = None,
) -> CascadeResult:
    """
    Pairwise distance matrix over tau_list for one path.

    tau_list must be nonincreasing; repeated values give zero distance.
    """
    taus = np.asarray([float(t) for t in tau_list])
    if taus.size < 2:
        raise DomainError("tau_list", taus.tolist(), "at least two viscosities")
    if np.any(taus < 0) or np.any(np.diff(taus) > 0):
        raise DomainError("tau_list", taus.tolist(), "nonincreasing, tau >= 0")
    trajectories: List[Trajectory] = []
    for tau in taus:
        params = cascade_params(path, t_end, tau, R)
        stride = record_every or max(1, params.steps // DEFAULT_SNAPSHOTS)
        trajectories.append(solve(spec, grid, params, path, u0=u0, record_every=stride))
    n = taus.size
    distances = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            distances[i, j] = distances[j, i] = l1_in_time(trajectories[i], trajectories[j])
    logger.debug(f"cascade over tau={taus.tolist()}: consecutive d={[distances[i, i + 1] for i in range(n - 1)]}")
    return CascadeResult(taus=taus, times=trajectories[0].times, distances=distances)
