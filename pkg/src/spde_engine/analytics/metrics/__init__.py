"""
Metrics
=======
L^p norms, fractional seminorms and ensemble statistics.
"""

from spde_engine.analytics.metrics.norms import l1_distance, lp_norm, lp_power, trapezoid_weights
from spde_engine.analytics.metrics.confidence import (
    ensemble_mean,
    flatness,
    scaled,
    within_standard_errors,
)
from spde_engine.analytics.metrics.seminorms import (
    eps_grid,
    fit_seminorm_constants,
    seminorm_p,
    seminorm_p_estimate,
    seminorm_rho,
)

__all__ = [
    "lp_power", "lp_norm", "l1_distance", "trapezoid_weights",
    "ensemble_mean", "scaled", "within_standard_errors", "flatness",
    "seminorm_p", "seminorm_p_estimate", "seminorm_rho", "eps_grid", "fit_seminorm_constants",
]
