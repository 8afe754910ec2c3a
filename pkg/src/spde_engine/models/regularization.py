"""
Regularization Parameters
=========================
The (η, R, τ) triple of the approximation cascade plus time discretization.

- eta-scheme: fourth-order regularization −ηΔ²u with mollified coefficients
- R-scheme:   flux truncated to B^R outside |ξ| <= R
- tau-scheme: vanishing viscosity +τΔu
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional

from spde_engine.utils.exceptions import DomainError


class Scheme(str, Enum):
    """Approximation stage driven by the solver."""
    ETA = "eta-scheme"
    R = "R-scheme"
    TAU = "tau-scheme"


# Output times and T must be integer multiples of dt up to this relative slack.
_STEP_SLACK = 1e-9


@dataclass(frozen=True)
class RegularizationParams:
    """
    Validated regularization and time-step parameters.

    R = math.inf means no flux truncation.
    """
    dt: float
    T: float
    eta: float = 0.0
    R: float = math.inf
    tau: float = 0.0
    scheme: Scheme = Scheme.TAU

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError("dt", self.dt, "dt > 0")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise DomainError("T", self.T, "T > 0")
        if self.eta < 0:
            raise DomainError("eta", self.eta, "eta >= 0")
        if self.tau < 0:
            raise DomainError("tau", self.tau, "tau >= 0")
        if not self.R > 0:
            raise DomainError("R", self.R, "R > 0")
        if self.scheme is Scheme.ETA and not 0 < self.eta < 1:
            raise DomainError("eta", self.eta, "eta-scheme requires 0 < eta < 1")
        if self.scheme is Scheme.R and not math.isfinite(self.R):
            raise DomainError("R", self.R, "R-scheme requires a finite truncation radius")
        self.step_of(self.T)

    @property
    def steps(self) -> int:
        return self.step_of(self.T)

    def step_of(self, t: float) -> int:
        """Step index of time t; t must be a multiple of dt."""
        ratio = t / self.dt
        index = int(round(ratio))
        if abs(ratio - index) > _STEP_SLACK * max(1.0, abs(ratio)):
            raise DomainError("time", t, f"integer multiple of dt={self.dt!r}")
        return index

    def with_tau(self, tau: float) -> "RegularizationParams":
        return replace(self, tau=float(tau))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dt": self.dt,
            "T": self.T,
            "eta": self.eta,
            "R": None if math.isinf(self.R) else self.R,
            "tau": self.tau,
            "scheme": self.scheme.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RegularizationParams":
        radius: Optional[float] = data.get("R")
        return cls(
            dt=float(data["dt"]),
            T=float(data["T"]),
            eta=float(data.get("eta", 0.0)),
            R=math.inf if radius is None else float(radius),
            tau=float(data.get("tau", 0.0)),
            scheme=Scheme(data.get("scheme", Scheme.TAU.value)),
        )
