"""
Test Functions
==============
Smooth test functions with closed-form derivatives, used by the weak-form
residuals.

- TrigonometricMode: b(x) = cos(2π m·x + phase); m = 0, phase = 0 gives b ≡ 1
- TimeCutoff:        a(t) = (1 − t/T)^power, vanishing at t = T
- XiBump:            c(ξ) = (1 − s²)³ on |s| < 1, s = (ξ − center)/width (C²)
- TensorTestFunction φ(t, x, ξ) = a(t)·b(x)·c(ξ)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from spde_engine.utils.exceptions import DomainError


@dataclass(frozen=True)
class TrigonometricMode:
    """Spatial factor cos(2π m·x + phase) on 𝕋^N."""
    wavevector: Tuple[int, ...] = (0,)
    phase: float = 0.0

    def _argument(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        arg = np.full(coords[0].shape, self.phase)
        for m, x in zip(self.wavevector, coords):
            arg = arg + 2.0 * np.pi * m * x
        return arg

    def value(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        return np.cos(self._argument(coords))

    def gradient(self, coords: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
        s = -np.sin(self._argument(coords))
        return tuple(2.0 * np.pi * m * s for m in self._padded(len(coords)))

    def hessian(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        """Array of shape (N, N, *grid) with ∂_ij b."""
        c = -np.cos(self._argument(coords))
        m = np.array(self._padded(len(coords)), dtype=float)
        outer = (2.0 * np.pi) ** 2 * np.outer(m, m)
        return outer.reshape(outer.shape + (1,) * c.ndim) * c

    def laplacian(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        m = np.array(self._padded(len(coords)), dtype=float)
        return -(2.0 * np.pi) ** 2 * float(m @ m) * np.cos(self._argument(coords))

    def _padded(self, dim: int) -> Tuple[int, ...]:
        return tuple(self.wavevector[:dim]) + (0,) * max(0, dim - len(self.wavevector))

    def to_dict(self) -> Dict[str, Any]:
        return {"wavevector": list(self.wavevector), "phase": self.phase}


@dataclass(frozen=True)
class TimeCutoff:
    """a(t) = (1 − t/T)^power on [0, T]."""
    T: float
    power: int = 3

    def value(self, t: Any) -> np.ndarray:
        return np.clip(1.0 - np.asarray(t, dtype=float) / self.T, 0.0, None) ** self.power


@dataclass(frozen=True)
class XiBump:
    """
    c(ξ) = (1 − s²)³ for |s| < 1, s = (ξ − center)/width.

    integral(v) = ∫_{-∞}^v c(ξ) dξ in closed form.
    """
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("xi_width", self.width, "width > 0")

    @property
    def support(self) -> Tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def _s(self, xi):
        return (np.asarray(xi, dtype=float) - self.center) / self.width

    def value(self, xi: Any) -> np.ndarray:
        s = self._s(xi)
        return np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 3, 0.0)

    def derivative(self, xi: Any) -> np.ndarray:
        s = self._s(xi)
        return np.where(np.abs(s) < 1.0, -6.0 * s * (1.0 - s * s) ** 2 / self.width, 0.0)

    def integral(self, v: Any) -> np.ndarray:
        s = np.clip(self._s(v), -1.0, 1.0)
        primitive = s - s ** 3 + 0.6 * s ** 5 - s ** 7 / 7.0
        return self.width * (primitive + 16.0 / 35.0)


@dataclass(frozen=True)
class TensorTestFunction:
    """φ(t, x, ξ) = a(t)·b(x)·c(ξ)."""
    spatial: TrigonometricMode
    velocity: XiBump
    power: int = 3

    def cutoff(self, T: float) -> TimeCutoff:
        return TimeCutoff(T=T, power=self.power)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spatial": self.spatial.to_dict(),
            "xi_center": self.velocity.center,
            "xi_width": self.velocity.width,
            "time_power": self.power,
        }


def family_member(index: int, dim: int, xi_center: float = 0.0, xi_width: float = 1.0) -> TensorTestFunction:
    """
    Named tensor family indexed by integers.

    index 0 gives b ≡ 1; index i >= 1 uses wavenumber m = (i + 1) // 2
    along every axis with phase 0 (odd i) or π/2 (even i).
    """
    if index < 0:
        raise DomainError("test_function", index, "index >= 0")
    if index == 0:
        mode = TrigonometricMode(wavevector=(0,) * dim, phase=0.0)
    else:
        m = (index + 1) // 2
        mode = TrigonometricMode(wavevector=(m,) * dim, phase=0.0 if index % 2 else math.pi / 2.0)
    return TensorTestFunction(spatial=mode, velocity=XiBump(center=xi_center, width=xi_width))


@dataclass(frozen=True)
class SpatialWeight:
    """ψ(x) for the Itô residual; defaults to ψ ≡ 1."""
    mode: TrigonometricMode = field(default_factory=TrigonometricMode)

    def value(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        return self.mode.value(coords)

    def gradient(self, coords: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
        return self.mode.gradient(coords)
