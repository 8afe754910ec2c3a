"""
Data Models
===========
Type-safe structures for the laboratory: grids and fields, coefficient
profiles, problem specifications, regularization parameters, kinetic
objects and report containers.
"""

from spde_engine.models.grid import ScalarField, TorusGrid, Trajectory, VectorField
from spde_engine.models.regularization import RegularizationParams, Scheme
from spde_engine.models.coefficients import (
    AbsValue,
    AdditiveNoise,
    Affine,
    CallableProfile,
    ClippedAbs,
    ClippedQuadratic,
    Constant,
    DiffusionModel,
    FluxModel,
    HarmonicLinearNoise,
    Mollified,
    MollifiedNoise,
    MultiplicativeNoise,
    NoiseModel,
    Quadratic,
    ScalarProfile,
    Truncated,
    ZeroNoise,
)
from spde_engine.models.problem import (
    CATALOG_KEYS,
    HypothesisConstants,
    InitialProfile,
    ProblemSpec,
    catalog_problem,
)
from spde_engine.models.kinetic import KineticField, KineticMeasureEstimate, VelocityGrid
from spde_engine.models.results import (
    AuditReport,
    CascadeResult,
    EnsembleReport,
    EnsembleStatistic,
    HypothesisCheck,
    SeminormFit,
    SeminormReport,
)

__all__ = [
    "TorusGrid", "ScalarField", "Trajectory", "VectorField",
    "RegularizationParams", "Scheme",
    "ScalarProfile", "Constant", "Affine", "Quadratic", "AbsValue", "ClippedQuadratic",
    "ClippedAbs", "Truncated", "Mollified", "CallableProfile",
    "FluxModel", "DiffusionModel",
    "NoiseModel", "ZeroNoise", "AdditiveNoise", "MultiplicativeNoise", "HarmonicLinearNoise",
    "MollifiedNoise",
    "CATALOG_KEYS", "HypothesisConstants", "InitialProfile", "ProblemSpec", "catalog_problem",
    "VelocityGrid", "KineticField", "KineticMeasureEstimate",
    "AuditReport", "HypothesisCheck", "CascadeResult", "EnsembleReport", "EnsembleStatistic",
    "SeminormReport", "SeminormFit",
]
