"""
Exception Hierarchy
===================
Every failure the laboratory can signal derives from SpdeEngineError.

Each exception carries:
- error_type: stable machine-readable tag (written into error.json)
- details: structured context (offending xi, step index, field path, ...)
- exit_code: the CLI exit status it maps to (2 = configuration, 3 = blow-up)
"""

from __future__ import annotations

from typing import Any, Dict, Optional

import numpy as np


# =============================================================================
# BASE EXCEPTION
# =============================================================================

class SpdeEngineError(Exception):
    """
    Base exception for the laboratory.

    Catch this to handle every library failure with a single except clause.
    """

    error_type = "ENGINE_ERROR"
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}

        msg_parts = [message]
        for key, value in self.details.items():
            msg_parts.append(f"   • {key}: {value}")
        super().__init__("\n".join(msg_parts))

    def to_dict(self) -> Dict[str, Any]:
        """Export to the machine-readable error format used by the CLI."""
        return {
            "error_type": self.error_type,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


# =============================================================================
# MODEL / COEFFICIENT ERRORS
# =============================================================================

class CoefficientEvaluationError(SpdeEngineError):
    """Raised when a coefficient evaluates to a non-finite value."""

    error_type = "COEFFICIENT_EVALUATION"

    def __init__(self, coefficient: str, xi: float, value: Any = None):
        self.coefficient = coefficient
        self.xi = float(xi)
        super().__init__(
            f"Coefficient '{coefficient}' is not finite at xi={self.xi!r}",
            {"coefficient": coefficient, "xi": self.xi, "value": value},
        )


class DomainError(SpdeEngineError, ValueError):
    """Raised when a parameter lies outside the range its formula requires."""

    error_type = "DOMAIN"

    def __init__(self, parameter: str, value: Any, requirement: str):
        self.parameter = parameter
        self.value = value
        super().__init__(
            f"{parameter}={value!r} violates: {requirement}",
            {"parameter": parameter, "value": value, "requirement": requirement},
        )


class UnsupportedConfigurationError(SpdeEngineError):
    """Raised for configurations outside the implemented discretization."""

    error_type = "UNSUPPORTED_CONFIGURATION"


# =============================================================================
# GRID / FIELD ERRORS
# =============================================================================

class GridMismatchError(SpdeEngineError, ValueError):
    """Raised when fields defined on different grids are combined."""

    error_type = "GRID_MISMATCH"

    def __init__(self, left: Any, right: Any):
        super().__init__(
            "Fields live on different grids",
            {"left": left, "right": right},
        )


class BlowUpError(SpdeEngineError):
    """
    Raised when the state becomes non-finite during time stepping.

    Usually a CFL violation: dt above the stability bound for the explicit
    flux / degenerate diffusion terms.

    Args:
        step_index: index of the step that produced the non-finite state
        last_finite: last finite state (ScalarField) when known
        trajectory: partial trajectory up to the last recorded snapshot
    """

    error_type = "BLOW_UP"
    exit_code = 3

    def __init__(self, step_index: int, last_finite: Any = None, trajectory: Any = None):
        self.step_index = int(step_index)
        self.last_finite = last_finite
        self.trajectory = trajectory
        super().__init__(
            f"Non-finite state after step {self.step_index} (check dt against the stability bound)",
            {"step_index": self.step_index},
        )


# =============================================================================
# KINETIC / DIAGNOSTIC PRECONDITIONS
# =============================================================================

class VelocityRangeError(SpdeEngineError, ValueError):
    """Raised when the velocity grid does not cover the state range."""

    error_type = "VELOCITY_RANGE"

    def __init__(self, state_min: float, state_max: float, xi_min: float, xi_max: float):
        super().__init__(
            "Velocity grid does not cover the observed state range",
            {
                "state_min": float(state_min),
                "state_max": float(state_max),
                "xi_min": float(xi_min),
                "xi_max": float(xi_max),
            },
        )


class PreconditionError(SpdeEngineError, ValueError):
    """Raised when a diagnostic is called outside its validity conditions."""

    error_type = "PRECONDITION"


# =============================================================================
# CONFIGURATION
# =============================================================================

class ConfigValidationError(SpdeEngineError, ValueError):
    """
    Raised when a run configuration violates its schema.

    Args:
        field_path: dotted path of the offending entry (e.g. "grid.points")
        reason: human-readable explanation
    """

    error_type = "CONFIG_VALIDATION"
    exit_code = 2

    def __init__(self, field_path: str, reason: str):
        self.field_path = field_path
        self.reason = reason
        super().__init__(
            f"Invalid configuration at '{field_path}': {reason}",
            {"field_path": field_path, "reason": reason},
        )
