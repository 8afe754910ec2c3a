"""
Result Models
=============
Immutable report objects returned by the audit, the cascade driver and the
diagnostics. Each exposes to_dict() for JSON export and, where tabular,
to_frame() for CSV export.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd


# ================================================================================
# HYPOTHESIS AUDIT
# ================================================================================

@dataclass(frozen=True)
class HypothesisCheck:
    """
    Outcome of one sampled hypothesis check.

    max_ratio is the largest observed value of (left side)/(bound); the
    witness holds the sample where it was attained.
    """
    name: str
    passed: bool
    max_ratio: float
    bound: str
    witness: Dict[str, Any] = field(default_factory=dict)
    observed_constant: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "witness": self.witness,
            "observed_constant": self.observed_constant,
        }


@dataclass(frozen=True)
class AuditReport:
    """Pass/fail per hypothesis, deterministic given (samples, seed)."""
    checks: List[HypothesisCheck]
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> HypothesisCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "checks": [check.to_dict() for check in self.checks],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "hypothesis": c.name,
                    "passed": c.passed,
                    "max_ratio": c.max_ratio,
                    "observed_constant": c.observed_constant,
                }
                for c in self.checks
            ]
        )


# ================================================================================
# ENSEMBLE STATISTICS
# ================================================================================

@dataclass(frozen=True)
class EnsembleStatistic:
    """Mean, standard error (sample stddev / sqrt(count)) and count."""
    mean: float
    standard_error: float
    count: int

    def within(self, target: float, errors: float) -> bool:
        return abs(self.mean - target) <= errors * self.standard_error

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean, "standard_error": self.standard_error, "count": self.count}


@dataclass(frozen=True)
class EnsembleReport:
    """
    Tabular ensemble estimates plus a summary.

    rows: one dict per (quantity, tau, time) with mean / standard_error / count
    summary: report-level verdicts and derived numbers (flatness, c_disc, ...)
    """
    name: str
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any]
    members: int
    excluded: List[Dict[str, Any]] = field(default_factory=list)
    # objects kept for export only (e.g. a kinetic measure estimate); not serialized
    artifacts: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def passed(self) -> Optional[bool]:
        value = self.summary.get("passed")
        return None if value is None else bool(value)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def select(self, quantity: str, **filters: Any) -> pd.DataFrame:
        frame = self.to_frame()
        frame = frame[frame["quantity"] == quantity]
        for key, value in filters.items():
            frame = frame[np.isclose(frame[key], value)] if isinstance(value, float) else frame[frame[key] == value]
        return frame

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "members": self.members,
            "excluded": self.excluded,
            "summary": self.summary,
            "rows": self.rows,
        }


# ================================================================================
# CASCADE
# ================================================================================

@dataclass(frozen=True)
class CascadeResult:
    """
    Pairwise L¹-in-time distances d(τ_i, τ_j) = ∫₀^T ‖u^τi − u^τj‖_L¹ dt
    for one noise path.
    """
    taus: np.ndarray
    times: np.ndarray
    distances: np.ndarray

    def distance(self, i: int, j: int) -> float:
        return float(self.distances[i, j])

    def consecutive(self) -> np.ndarray:
        """d(τ_i, τ_{i+1}) along the diagonal pairs."""
        n = len(self.taus)
        return np.array([self.distances[i, i + 1] for i in range(n - 1)])

    def to_frame(self) -> pd.DataFrame:
        n = len(self.taus)
        return pd.DataFrame(
            [
                {"i": i, "j": j, "tau_i": float(self.taus[i]), "tau_j": float(self.taus[j]),
                 "distance": float(self.distances[i, j])}
                for i in range(n)
                for j in range(n)
            ]
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "taus": self.taus.tolist(),
            "times": self.times.tolist(),
            "distances": self.distances.tolist(),
        }


# ================================================================================
# SEMINORMS
# ================================================================================

@dataclass(frozen=True)
class SeminormReport:
    """
    p^λ(u), p^λ_ρ(u) and the ε-grid behind the sup.

    p_standard_error is 0 when p^λ is an exact sum (N = 1).
    """
    lam: float
    p_value: float
    rho_value: float
    eps_grid: np.ndarray
    rho_values: np.ndarray
    kernel: str
    p_standard_error: float = 0.0

    @property
    def argmax_eps(self) -> float:
        return float(self.eps_grid[int(np.argmax(self.rho_values))])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "p": self.p_value,
            "p_standard_error": self.p_standard_error,
            "p_rho": self.rho_value,
            "kernel": self.kernel,
            "eps_grid": self.eps_grid.tolist(),
            "rho_values": self.rho_values.tolist(),
        }


@dataclass(frozen=True)
class SeminormFit:
    """
    Constants fitted over a field corpus:
        p^λ_ρ(u) <= rho_over_p · p^λ(u)
        p^s(u)   <= s_over_rho / (λ - s) · p^λ_ρ(u)
    """
    lam: float
    s: float
    rho_over_p: float
    s_over_rho: float
    corpus_size: int
    ratios_rho_over_p: Sequence[float]
    ratios_s_over_rho: Sequence[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "s": self.s,
            "rho_over_p": self.rho_over_p,
            "s_over_rho": self.s_over_rho,
            "corpus_size": self.corpus_size,
            "ratios_rho_over_p": list(map(float, self.ratios_rho_over_p)),
            "ratios_s_over_rho": list(map(float, self.ratios_s_over_rho)),
        }
