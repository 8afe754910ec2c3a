"""
Grid Models
===========
Periodic lattice on the unit torus and the value types living on it.

- TorusGrid: M points per axis on [0,1)^N, N in {1, 2}
- ScalarField: one finite real value per cell, read-only
- Trajectory: time-indexed snapshots plus the parameters that produced them
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from spde_engine.utils.exceptions import (
    DomainError,
    GridMismatchError,
    UnsupportedConfigurationError,
)

if TYPE_CHECKING:
    from spde_engine.models.regularization import RegularizationParams


# ================================================================================
# TORUS GRID
# ================================================================================

@dataclass(frozen=True)
class TorusGrid:
    """
    Uniform periodic lattice on 𝕋^N with side normalized to 1.

    Cell i sits at x_i = i·h, h = 1/M. Index arithmetic wraps exactly.
    """
    dim: int
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise UnsupportedConfigurationError(
                f"Torus dimension {self.dim} not supported",
                {"dim": self.dim, "supported": [1, 2]},
            )
        if int(self.points) != self.points or self.points < 4:
            raise DomainError("points", self.points, "integer M >= 4")

    @property
    def h(self) -> float:
        return 1.0 / self.points

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def cells(self) -> int:
        return self.points ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Per-axis coordinate arrays, each of shape `self.shape` ('ij' indexing)."""
        axis = np.arange(self.points) * self.h
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def indices(self) -> Tuple[np.ndarray, ...]:
        axis = np.arange(self.points)
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape))

    def field_from(self, fn: Callable[..., np.ndarray]) -> "ScalarField":
        """Evaluate fn(x1[, x2]) at the cell positions."""
        values = np.asarray(fn(*self.coordinates()), dtype=float)
        return ScalarField(self, np.broadcast_to(values, self.shape).copy())

    def to_dict(self) -> Dict[str, int]:
        return {"dim": self.dim, "points": self.points}


# ================================================================================
# SCALAR FIELD
# ================================================================================

class ScalarField:
    """
    Real-valued grid function. Values are copied and frozen on construction.

    Raises:
        GridMismatchError: values do not match the grid shape
        DomainError: a value is not finite
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: TorusGrid, values: Any):
        array = np.array(values, dtype=float)
        if array.shape != grid.shape:
            raise GridMismatchError(grid.shape, array.shape)
        if not np.all(np.isfinite(array)):
            bad = int(np.flatnonzero(~np.isfinite(array.ravel()))[0])
            raise DomainError("values", f"non-finite at flat index {bad}", "all values finite")
        array.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", array)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    def __repr__(self) -> str:
        return f"ScalarField(dim={self.grid.dim}, points={self.grid.points})"

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    def require_same_grid(self, other: "ScalarField") -> None:
        if other.grid != self.grid:
            raise GridMismatchError(self.grid.to_dict(), other.grid.to_dict())

    def with_values(self, values: Any) -> "ScalarField":
        return ScalarField(self.grid, values)

    def total(self) -> float:
        """Cell sum Σ_i u_i."""
        return float(np.sum(self.values))

    def mean(self) -> float:
        """Integral over the unit torus, h^N Σ_i u_i."""
        return float(np.sum(self.values) * self.grid.cell_volume)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        self.require_same_grid(other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        self.require_same_grid(other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def to_frame(self) -> pd.DataFrame:
        """One row per cell: index coordinates, positions, value."""
        columns: Dict[str, np.ndarray] = {}
        names = ("i", "j")
        for axis, idx in enumerate(self.grid.indices()):
            columns[names[axis]] = idx.ravel()
        for axis, coord in enumerate(self.grid.coordinates()):
            columns[f"x{axis + 1}"] = coord.ravel()
        columns["value"] = self.values.ravel()
        return pd.DataFrame(columns)


VectorField = Tuple[ScalarField, ...]


# ================================================================================
# TRAJECTORY
# ================================================================================

@dataclass(frozen=True)
class Trajectory:
    """
    Snapshots u(t_j) of one run.

    Attributes:
        grid: lattice shared by every snapshot
        times: strictly increasing output times
        step_indices: solver step index of each snapshot (t_j = step_j · dt)
        snapshots: array of shape (J+1, *grid.shape)
        params: regularization parameters of the run
        noise: identity of the driving NoisePath (seed, member, modes, dt)
    """
    grid: TorusGrid
    times: np.ndarray
    step_indices: np.ndarray
    snapshots: np.ndarray
    params: Optional["RegularizationParams"] = None
    noise: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise DomainError("times", times.shape, "non-empty 1-d sequence")
        if np.any(np.diff(times) <= 0):
            raise DomainError("times", times.tolist(), "strictly increasing")
        if self.snapshots.shape != (times.size,) + self.grid.shape:
            raise GridMismatchError(
                (times.size,) + self.grid.shape, tuple(self.snapshots.shape)
            )
        if len(self.step_indices) != times.size:
            raise DomainError("step_indices", len(self.step_indices), f"length {times.size}")
        snapshots = np.array(self.snapshots, dtype=float)
        snapshots.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "step_indices", np.asarray(self.step_indices, dtype=np.int64))
        object.__setattr__(self, "snapshots", snapshots)

    def __len__(self) -> int:
        return int(self.times.size)

    def field(self, j: int) -> ScalarField:
        return ScalarField(self.grid, self.snapshots[j])

    @property
    def fields(self) -> List[ScalarField]:
        return [self.field(j) for j in range(len(self))]

    def __iter__(self) -> Iterator[Tuple[float, ScalarField]]:
        for j in range(len(self)):
            yield float(self.times[j]), self.field(j)

    @property
    def initial(self) -> ScalarField:
        return self.field(0)

    @property
    def final(self) -> ScalarField:
        return self.field(len(self) - 1)

    def state_range(self) -> Tuple[float, float]:
        return float(np.min(self.snapshots)), float(np.max(self.snapshots))

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per (time, cell)."""
        frames = []
        for j in range(len(self)):
            frame = self.field(j).to_frame()
            frame.insert(0, "time", self.times[j])
            frame.insert(1, "step", int(self.step_indices[j]))
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def metadata(self) -> Dict[str, Any]:
        return {
            "grid": self.grid.to_dict(),
            "times": self.times.tolist(),
            "step_indices": self.step_indices.tolist(),
            "params": self.params.to_dict() if self.params is not None else None,
            "noise": dict(self.noise),
        }
