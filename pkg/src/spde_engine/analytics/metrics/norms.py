"""
Grid Norms
==========
Quadrature of L^p norms on the unit torus (cell volume h^N).
"""

import math

import numpy as np

from spde_engine.models.grid import ScalarField
from spde_engine.utils.exceptions import DomainError


def lp_power(u: ScalarField, p: float) -> float:
    """‖u‖_p^p = h^N Σ_i |u_i|^p."""
    if not p >= 1:
        raise DomainError("p", p, "p >= 1")
    return float(np.sum(np.abs(u.values) ** p) * u.grid.cell_volume)


def lp_norm(u: ScalarField, p: float = 2.0) -> float:
    """(h^N Σ_i |u_i|^p)^(1/p); p = inf gives the max norm."""
    if math.isinf(p):
        return float(np.max(np.abs(u.values)))
    return lp_power(u, p) ** (1.0 / p)


def l1_distance(u: ScalarField, v: ScalarField) -> float:
    u.require_same_grid(v)
    return float(np.sum(np.abs(u.values - v.values)) * u.grid.cell_volume)


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """w_j with Σ_j w_j f(t_j) the trapezoid rule on the (possibly uneven) grid."""
    times = np.asarray(times, dtype=float)
    weights = np.zeros_like(times)
    if times.size < 2:
        return weights
    gaps = np.diff(times)
    weights[:-1] += 0.5 * gaps
    weights[1:] += 0.5 * gaps
    return weights
