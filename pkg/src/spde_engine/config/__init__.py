"""
Configuration
=============
Defaults (settings), documented tolerances (thresholds), the validated
RunConfig (run_config) and file loading with overrides (loader).
"""

from spde_engine.config.settings import (
    AUDIT_DEFAULTS,
    ENSEMBLE_DEFAULTS,
    KINETIC_DEFAULTS,
    NOISE_DEFAULTS,
    OUTPUT_DEFAULTS,
    QUADRATURE_CONFIG,
    SEMINORM_DEFAULTS,
    SOLVER_DEFAULTS,
)
from spde_engine.config.thresholds import ALL_TOLERANCES, DocumentedTolerance, ToleranceKind
