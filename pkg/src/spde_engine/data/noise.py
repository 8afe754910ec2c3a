"""
Noise Paths
===========
Truncated cylindrical Wiener process W = Σ_{k<=K} β_k e_k.

Increments come from a counter-based generator (numpy Philox) keyed by
(seed, member, mode), with the step index as counter. Any single increment
is addressable without generating its predecessors, so ensemble members
and modes can be sampled concurrently and reproduced bit-exactly under any
schedule.

Seed splitting rule:
    key     = [seed, (member << 32) | mode]      (mode is 1-based)
    counter = [step // 4, 0, 0, 0], lane step % 4
    uniform = ((raw >> 11) + 0.5) · 2^-53
    Δβ_k[step] = Φ^{-1}(uniform) · sqrt(dt)
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy.special import ndtri

from spde_engine.models.grid import ScalarField
from spde_engine.models.problem import ProblemSpec
from spde_engine.utils.exceptions import CoefficientEvaluationError, DomainError, SpdeEngineError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1
_LANES = 4

DUMP_MAGIC = b"SPDEPATH"
DUMP_VERSION = 1
_HEADER = struct.Struct("<8sIQQQQd")


# ================================================================================
# COUNTER-BASED SAMPLING
# ================================================================================

def _generator(seed: int, member: int, mode: int, block: int = 0) -> np.random.Philox:
    key = np.array([seed & _MASK64, ((member & _MASK32) << 32) | (mode & _MASK32)], dtype=np.uint64)
    counter = np.array([block, 0, 0, 0], dtype=np.uint64)
    return np.random.Philox(key=key, counter=counter)


def _to_gaussian(raw: np.ndarray, dt: float) -> np.ndarray:
    uniform = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(uniform) * math.sqrt(dt)


def increment(seed: int, member: int, mode: int, step: int, dt: float) -> float:
    """Δβ_mode[step] of ensemble member `member`, without generating predecessors."""
    if mode < 1:
        raise DomainError("mode", mode, "mode >= 1")
    if step < 0:
        raise DomainError("step", step, "step >= 0")
    raw = _generator(seed, member, mode, step // _LANES).random_raw(_LANES)
    return float(_to_gaussian(raw[step % _LANES: step % _LANES + 1], dt)[0])


# ================================================================================
# NOISE PATH
# ================================================================================

@dataclass(frozen=True)
class NoisePath:
    """
    Immutable table of Brownian increments.

    increments[k-1, j] = Δβ_k over [t_j, t_{j+1}], variance dt.
    """
    seed: int
    member: int
    steps: int
    dt: float
    modes: int
    increments: np.ndarray

    def __post_init__(self):
        table = np.array(self.increments, dtype=np.float64).reshape(self.modes, self.steps)
        table.setflags(write=False)
        object.__setattr__(self, "increments", table)

    def step_increments(self, step: int) -> np.ndarray:
        if not 0 <= step < self.steps:
            raise DomainError("step", step, f"0 <= step < {self.steps}")
        return self.increments[:, step]

    def aggregated(self, start: int, stop: int) -> np.ndarray:
        """Σ_{start <= j < stop} Δβ_k[j] per mode."""
        return np.sum(self.increments[:, start:stop], axis=1)

    def brownian(self, step: int) -> np.ndarray:
        """β_k(t_step) per mode."""
        if not 0 <= step <= self.steps:
            raise DomainError("step", step, f"0 <= step <= {self.steps}")
        return self.aggregated(0, step)

    def identity(self) -> Dict[str, Any]:
        return {"seed": self.seed, "member": self.member, "modes": self.modes, "steps": self.steps, "dt": self.dt}

    def to_dict(self) -> Dict[str, Any]:
        return {**self.identity(), "increments": self.increments.tolist()}


def sample_path(seed: int, steps: int, dt: float, K: int, member: int = 0) -> NoisePath:
    """
    Independent N(0, dt) increments for modes 1..K over `steps` steps.

    K = 0 yields an empty table (deterministic dynamics).
    """
    if steps < 1:
        raise DomainError("steps", steps, "steps >= 1")
    if not dt > 0:
        raise DomainError("dt", dt, "dt > 0")
    if K < 0:
        raise DomainError("K", K, "K >= 0")
    table = np.empty((K, steps))
    for mode in range(1, K + 1):
        raw = _generator(seed, member, mode).random_raw(steps)
        table[mode - 1] = _to_gaussian(raw, dt)
    return NoisePath(seed=int(seed), member=int(member), steps=int(steps), dt=float(dt), modes=int(K), increments=table)


def zero_path(steps: int, dt: float) -> NoisePath:
    return NoisePath(seed=0, member=0, steps=int(steps), dt=float(dt), modes=0, increments=np.empty((0, steps)))


# ================================================================================
# NOISE OPERATOR
# ================================================================================

def noise_field_values(spec: ProblemSpec, coords, values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Σ_k g_k(x, u(x))·weights_k on raw arrays."""
    modes = weights.shape[0]
    if modes == 0 or spec.noise.is_zero:
        return np.zeros_like(values)
    coefficients = spec.noise_coefficients(coords, values, modes)
    if not np.all(np.isfinite(coefficients)):
        bad = np.argwhere(~np.isfinite(coefficients))[0]
        xi = float(values[tuple(bad[1:])])
        raise CoefficientEvaluationError(f"g_{int(bad[0]) + 1}", xi, float(coefficients[tuple(bad)]))
    return np.tensordot(weights, coefficients, axes=1)


def apply_noise(u: ScalarField, spec: ProblemSpec, path: NoisePath, step: int) -> ScalarField:
    """x ↦ Σ_{k<=K} g_k(x, u(x))·Δβ_k[step], K = path.modes."""
    weights = path.step_increments(step)
    return ScalarField(u.grid, noise_field_values(spec, u.grid.coordinates(), u.values, weights))


# ================================================================================
# DIAGNOSTICS
# ================================================================================

@dataclass(frozen=True)
class U0Norm:
    """‖W(t)‖²_{U₀} = Σ_k β_k(t)²/k²."""
    value: float
    step: int
    time: float


def u0_norm(path: NoisePath, step: int) -> U0Norm:
    beta = path.brownian(step)
    k = np.arange(1, path.modes + 1, dtype=float)
    value = float(np.sum(beta ** 2 / k ** 2)) if path.modes else 0.0
    return U0Norm(value=value, step=int(step), time=step * path.dt)


def truncation_tail(spec: ProblemSpec, K: Optional[int] = None, xi: Any = 0.0) -> float:
    """
    Variance rate Σ_{k>K} sup_x g_k(x, ξ)² dropped by truncating the
    cylindrical series at K, maximized over the given ξ values.
    """
    modes = spec.modes if K is None else int(K)
    tail = spec.noise.tail_bound(modes, np.atleast_1d(np.asarray(xi, dtype=float)))
    return float(np.max(tail))


# ================================================================================
# DUMP / LOAD
# ================================================================================

def dump_path(path: NoisePath, target: Union[str, Path]) -> Path:
    """Little-endian header (magic, version, seed, member, steps, modes, dt) + '<f8' table."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(
        DUMP_MAGIC, DUMP_VERSION, path.seed & _MASK64, path.member, path.steps, path.modes, path.dt
    )
    with target.open("wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(path.increments, dtype="<f8").tobytes())
    logger.debug(f"Noise path dumped to {target} ({path.modes}x{path.steps})")
    return target


def load_path(source: Union[str, Path]) -> NoisePath:
    source = Path(source)
    data = source.read_bytes()
    if len(data) < _HEADER.size:
        raise SpdeEngineError("Noise dump truncated", {"path": str(source), "bytes": len(data)})
    magic, version, seed, member, steps, modes, dt = _HEADER.unpack_from(data, 0)
    if magic != DUMP_MAGIC or version != DUMP_VERSION:
        raise SpdeEngineError("Not a noise path dump", {"path": str(source), "magic": magic, "version": version})
    expected = _HEADER.size + 8 * steps * modes
    if len(data) != expected:
        raise SpdeEngineError("Noise dump size mismatch", {"path": str(source), "bytes": len(data), "expected": expected})
    table = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(modes, steps)
    return NoisePath(seed=int(seed), member=int(member), steps=int(steps), dt=float(dt), modes=int(modes), increments=table)
