"""
Kinetic Models
==============
Discrete velocity variable and the kinetic objects built on it.

- VelocityGrid: uniform nodes ξ_0 < ... < ξ_{P-1}
- KineticField: f(x_i, ξ_j) = 1_{u(x_i) > ξ_j}
- KineticMeasureEstimate: deposited masses of n₁ and n₂ per (t_j, x_i)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
import pandas as pd

from spde_engine.models.grid import TorusGrid
from spde_engine.utils.exceptions import DomainError, VelocityRangeError


# ================================================================================
# VELOCITY GRID
# ================================================================================

@dataclass(frozen=True)
class VelocityGrid:
    xi_min: float
    xi_max: float
    points: int

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 3:
            raise DomainError("velocity.points", self.points, "integer >= 3")
        if not self.xi_max > self.xi_min:
            raise DomainError("velocity.range", (self.xi_min, self.xi_max), "xi_max > xi_min")

    @property
    def spacing(self) -> float:
        return (self.xi_max - self.xi_min) / (self.points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.points)

    @classmethod
    def covering(cls, state_min: float, state_max: float, points: int, margin_cells: int = 2) -> "VelocityGrid":
        """Smallest grid with `points` nodes covering [state_min, state_max] with the given margin."""
        span = float(state_max - state_min)
        if span <= 0:
            span = 1.0
            state_min, state_max = state_min - 0.5, state_max + 0.5
        free = points - 1 - 2 * margin_cells
        if free < 1:
            raise DomainError("velocity.points", points, f"> 2·margin_cells + 1 = {2 * margin_cells + 1}")
        spacing = span / free
        return cls(state_min - margin_cells * spacing, state_max + margin_cells * spacing, points)

    def covers(self, state_min: float, state_max: float, margin_cells: float = 0.0) -> bool:
        """ξ_min + margin < min u and max u <= ξ_max − margin (margin in cells)."""
        if margin_cells <= 0:
            return self.xi_min < state_min and state_max <= self.xi_max
        slack = 1e-12 * max(1.0, abs(self.xi_min), abs(self.xi_max))
        margin = margin_cells * self.spacing
        return state_min >= self.xi_min + margin - slack and state_max <= self.xi_max - margin + slack

    def require_coverage(self, state_min: float, state_max: float, margin_cells: float = 0.0) -> None:
        if not self.covers(state_min, state_max, margin_cells):
            raise VelocityRangeError(state_min, state_max, self.xi_min, self.xi_max)

    def bin_index(self, values: np.ndarray) -> np.ndarray:
        """Nearest node index (the ξ-cell containing the value)."""
        index = np.rint((np.asarray(values) - self.xi_min) / self.spacing).astype(np.int64)
        return np.clip(index, 0, self.points - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"xi_min": self.xi_min, "xi_max": self.xi_max, "points": self.points}


# ================================================================================
# KINETIC FIELD
# ================================================================================

@dataclass(frozen=True)
class KineticField:
    """
    0/1 array of shape (*grid.shape, P).

    Invariants: nonincreasing in ξ, f(·, ξ_min) = 1, f(·, ξ_max) = 0.
    """
    grid: TorusGrid
    vgrid: VelocityGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int8)
        if values.shape != self.grid.shape + (self.vgrid.points,):
            raise DomainError("kinetic.shape", values.shape, f"{self.grid.shape + (self.vgrid.points,)}")
        if not np.all((values == 0) | (values == 1)):
            raise DomainError("kinetic.values", "non-binary", "values in {0, 1}")
        if np.any(np.diff(values, axis=-1) > 0):
            raise DomainError("kinetic.values", "increasing in xi", "nonincreasing in xi")
        if not (np.all(values[..., 0] == 1) and np.all(values[..., -1] == 0)):
            raise DomainError("kinetic.boundary", "f(xi_min)=1 and f(xi_max)=0 violated", "boundary values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def jump_sums(self) -> np.ndarray:
        """Σ_j [f(x, ξ_{j+1}) − f(x, ξ_j)] per cell; −1 everywhere."""
        return np.sum(np.diff(self.values.astype(np.int64), axis=-1), axis=-1)

    def reconstruct(self) -> np.ndarray:
        """Δξ · Σ_j (f(x, ξ_j) − 1_{0 > ξ_j}), equal to u(x) up to ±Δξ."""
        below_zero = (self.vgrid.nodes < 0.0).astype(np.int64)
        return self.vgrid.spacing * np.sum(self.values.astype(np.int64) - below_zero, axis=-1)


# ================================================================================
# KINETIC MEASURE ESTIMATE
# ================================================================================

@dataclass(frozen=True)
class KineticMeasureEstimate:
    """
    Deposited masses of the kinetic measures.

    Arrays have shape (J+1, cells): snapshot j, flat cell index i. Each
    (j, i) mass sits at ξ-bin `bin_index[j, i]` (nearest deposition) or at
    the exact state `states[j, i]` (exact deposition).

    n1[j, i] = |div_h Σ(u)|² · h^N · w_j
    n2[j, i] = τ |∇_h u|² · h^N · w_j
    with w_j the trapezoid weights of the snapshot times.
    """
    grid: TorusGrid
    vgrid: VelocityGrid
    times: np.ndarray
    time_weights: np.ndarray
    tau: float
    states: np.ndarray
    bin_index: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    deposition: str = "nearest"

    @property
    def total_n1(self) -> float:
        return float(np.sum(self.n1))

    @property
    def total_n2(self) -> float:
        return float(np.sum(self.n2))

    @property
    def total(self) -> float:
        return self.total_n1 + self.total_n2

    def deposit_points(self) -> np.ndarray:
        """ξ location of every (j, i) mass."""
        if self.deposition == "exact":
            return self.states
        return self.vgrid.nodes[self.bin_index]

    def xi_marginal(self) -> Dict[str, np.ndarray]:
        """Masses summed over (t, x) per ξ-bin."""
        flat = self.bin_index.ravel()
        return {
            "n1": np.bincount(flat, weights=self.n1.ravel(), minlength=self.vgrid.points),
            "n2": np.bincount(flat, weights=self.n2.ravel(), minlength=self.vgrid.points),
        }

    def to_frame(self) -> pd.DataFrame:
        """(t_bin, x_index, xi_bin, n1_mass, n2_mass), one row per deposit."""
        snapshots, cells = self.n1.shape
        return pd.DataFrame(
            {
                "t_bin": np.repeat(np.arange(snapshots), cells),
                "x_index": np.tile(np.arange(cells), snapshots),
                "xi_bin": self.bin_index.ravel(),
                "n1_mass": self.n1.ravel(),
                "n2_mass": self.n2.ravel(),
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": self.grid.to_dict(),
            "velocity_grid": self.vgrid.to_dict(),
            "tau": self.tau,
            "deposition": self.deposition,
            "total_n1": self.total_n1,
            "total_n2": self.total_n2,
            "snapshots": int(self.n1.shape[0]),
        }
