"""
Time Stepper
============
Semi-implicit Euler–Maruyama integration of

    du + div(B(u)) dt = div(A(u)∇u) dt − ηΔ²u dt + τΔu dt + Φ(u) dW

on the periodic lattice.

One step solves

    (I + η·dt·Δ_h² − τ·dt·Δ_h) u^{n+1}
        = u^n + dt·(Rusanov(u^n) + D²:Ā(u^n)) + Σ_k g_k(x, u^n) Δβ_k[n]

exactly in Fourier space. Flux, degenerate diffusion and noise are frozen
at the pre-step state (Itô convention). Every operator is conservative, so
with Φ = 0 the cell sum only moves by rounding.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as spfft

from spde_engine.analytics.hypotheses import effective_spec
from spde_engine.analytics.operators import kirchhoff_values, rusanov_values
from spde_engine.config.settings import SOLVER_DEFAULTS
from spde_engine.data.noise import NoisePath, noise_field_values
from spde_engine.models.grid import ScalarField, TorusGrid, Trajectory
from spde_engine.models.problem import ProblemSpec
from spde_engine.models.regularization import RegularizationParams
from spde_engine.utils.exceptions import BlowUpError, DomainError
from spde_engine.utils.logger import get_logger, log_performance

logger = get_logger(__name__)

# path.dt and params.dt must agree to this relative slack
_DT_SLACK = 1e-12


# ================================================================================
# COEFFICIENTS AND STABILITY
# ================================================================================

def stability_bound(
    spec: ProblemSpec,
    grid: TorusGrid,
    state_range: float = SOLVER_DEFAULTS['state_range'],
    factor: float = SOLVER_DEFAULTS['stability_factor'],
) -> float:
    """
    Largest admissible dt for the explicit terms:

        factor · min{ h / max|b|, h² / (2N·max‖A‖) }

    with both maxima over [−state_range, state_range]. Returns inf when
    neither term is present.
    """
    xi = np.linspace(-state_range, state_range, SOLVER_DEFAULTS['stability_samples'])
    max_speed = float(np.max(spec.flux.speed(xi)))
    max_diffusion = float(np.max(spec.diffusion.norm(xi)))
    h = grid.h
    limits = []
    if max_speed > 0.0:
        limits.append(h / max_speed)
    if max_diffusion > 0.0:
        limits.append(h * h / (2.0 * grid.dim * max_diffusion))
    if not limits:
        return math.inf
    return factor * min(limits)


def _laplacian_symbol(grid: TorusGrid) -> np.ndarray:
    """Eigenvalues of Δ_h on the rfftn frequency layout."""
    M, h = grid.points, grid.h
    full = -(4.0 / (h * h)) * np.sin(np.pi * np.arange(M) / M) ** 2
    half = full[: M // 2 + 1]
    if grid.dim == 1:
        return half
    return full[:, None] + half[None, :]


# ================================================================================
# STEPPER
# ================================================================================

class Stepper:
    """
    One-step map for fixed (spec, grid, params, path).

    The implicit symbol is precomputed once. advance() works on raw arrays
    and never mutates its input.
    """

    def __init__(self, spec: ProblemSpec, grid: TorusGrid, params: RegularizationParams, path: NoisePath):
        if spec.dim != grid.dim:
            raise DomainError("grid.dim", grid.dim, f"equal to problem dimension {spec.dim}")
        if abs(path.dt - params.dt) > _DT_SLACK * params.dt:
            raise DomainError("path.dt", path.dt, f"equal to params.dt={params.dt!r}")
        if path.steps < params.steps:
            raise DomainError("path.steps", path.steps, f">= {params.steps} steps of the run")
        self.spec = effective_spec(spec, params)
        self.grid = grid
        self.params = params
        self.path = path
        self._coords = grid.coordinates()
        self._axes = tuple(range(grid.dim))
        dt = params.dt
        if params.eta == 0.0 and params.tau == 0.0:
            self._inverse: Optional[np.ndarray] = None
        else:
            lam = _laplacian_symbol(grid)
            self._inverse = 1.0 / (1.0 + params.eta * dt * lam * lam - params.tau * dt * lam)

    def explicit(self, values: np.ndarray, step: int) -> np.ndarray:
        """u^n + dt·(flux + diffusion) + noise, all at the pre-step state."""
        h = self.grid.h
        drift = rusanov_values(values, self.spec.flux, h) + kirchhoff_values(values, self.spec.diffusion, h)
        rhs = values + self.params.dt * drift
        if self.path.modes:
            rhs = rhs + noise_field_values(self.spec, self._coords, values, self.path.step_increments(step))
        return rhs

    def advance(self, values: np.ndarray, step: int) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            rhs = self.explicit(values, step)
            if self._inverse is None:
                return rhs
            spectrum = spfft.rfftn(rhs, axes=self._axes)
            return spfft.irfftn(spectrum * self._inverse, s=values.shape, axes=self._axes)


def step(
    u: ScalarField,
    params: RegularizationParams,
    spec: ProblemSpec,
    path: NoisePath,
    step_index: int,
) -> ScalarField:
    """
    Single step t_n → t_{n+1} with the increments of step `step_index`.

    Raises:
        BlowUpError: the new state has a non-finite value
    """
    values = Stepper(spec, u.grid, params, path).advance(u.values, step_index)
    if not np.all(np.isfinite(values)):
        raise BlowUpError(step_index, last_finite=u)
    return ScalarField(u.grid, values)


# ================================================================================
# DRIVERS
# ================================================================================

def record_steps(
    params: RegularizationParams,
    output_times: Optional[Sequence[float]] = None,
    record_every: Optional[int] = None,
) -> List[int]:
    """
    Sorted step indices to snapshot, always including 0.

    Without output_times, records every `record_every` steps plus the final
    step, or just {0, final} when record_every is unset.
    """
    final = params.steps
    if output_times is not None:
        indices = {0}
        for t in output_times:
            if t < 0 or t > params.T * (1.0 + 1e-12):
                raise DomainError("output_times", t, f"0 <= t <= T={params.T!r}")
            indices.add(params.step_of(t))
        return sorted(indices)
    if record_every is None:
        return [0, final]
    if record_every < 1:
        raise DomainError("record_every", record_every, "record_every >= 1")
    return sorted(set(range(0, final + 1, int(record_every))) | {final})


def _trajectory(stepper: Stepper, steps: List[int], snapshots: List[np.ndarray]) -> Trajectory:
    dt = stepper.params.dt
    return Trajectory(
        grid=stepper.grid,
        times=np.array([n * dt for n in steps]),
        step_indices=np.array(steps, dtype=np.int64),
        snapshots=np.stack(snapshots),
        params=stepper.params,
        noise=stepper.path.identity(),
    )


def _integrate(stepper: Stepper, states: List[np.ndarray], steps: List[int]) -> List[Trajectory]:
    """Advance every state in lockstep with the same increments."""
    wanted = set(steps)
    recorded = [0]
    snapshots = [[s.copy()] for s in states]
    current = list(states)
    for n in range(steps[-1]):
        for index, values in enumerate(current):
            new = stepper.advance(values, n)
            if not np.all(np.isfinite(new)):
                partial = _trajectory(stepper, recorded, snapshots[index])
                logger.error(f"Non-finite state after step {n} (t={(n + 1) * stepper.params.dt:.6g})")
                raise BlowUpError(n, last_finite=ScalarField(stepper.grid, values), trajectory=partial)
            current[index] = new
        if n + 1 in wanted:
            recorded.append(n + 1)
            for index, values in enumerate(current):
                snapshots[index].append(values.copy())
    return [_trajectory(stepper, recorded, s) for s in snapshots]


def _initial_values(spec: ProblemSpec, grid: TorusGrid, u0: Optional[ScalarField]) -> np.ndarray:
    if u0 is None:
        return np.array(spec.initial_field(grid).values)
    if u0.grid != grid:
        raise DomainError("u0.grid", u0.grid.to_dict(), f"equal to {grid.to_dict()}")
    return np.array(u0.values)


@log_performance(logger)
def solve(
    spec: ProblemSpec,
    grid: TorusGrid,
    params: RegularizationParams,
    path: NoisePath,
    output_times: Optional[Sequence[float]] = None,
    u0: Optional[ScalarField] = None,
    record_every: Optional[int] = None,
) -> Trajectory:
    """
    Integrate from u0 (default: the spec's initial profile) and record the
    requested snapshots. Stops at the last requested time.

    Raises:
        BlowUpError: carries the last finite state and the partial trajectory
    """
    stepper = Stepper(spec, grid, params, path)
    steps = record_steps(params, output_times, record_every)
    logger.debug(
        f"solve: {spec.key or 'inline'} N={grid.dim} M={grid.points} dt={params.dt:.3g} "
        f"steps={steps[-1]} K={path.modes} scheme={params.scheme.value}"
    )
    return _integrate(stepper, [_initial_values(spec, grid, u0)], steps)[0]


@log_performance(logger)
def coupled_solve(
    spec: ProblemSpec,
    grid: TorusGrid,
    params: RegularizationParams,
    path: NoisePath,
    u0_a: ScalarField,
    u0_b: ScalarField,
    output_times: Optional[Sequence[float]] = None,
    record_every: Optional[int] = None,
) -> Tuple[Trajectory, Trajectory]:
    """Two solutions driven by the same noise realization."""
    stepper = Stepper(spec, grid, params, path)
    steps = record_steps(params, output_times, record_every)
    first, second = _integrate(
        stepper, [_initial_values(spec, grid, u0_a), _initial_values(spec, grid, u0_b)], steps
    )
    return first, second


# ================================================================================
# INITIAL DATA
# ================================================================================

def mollifier_kernel(grid: TorusGrid, eps: float) -> np.ndarray:
    """
    Discrete bump exp(−1/(1 − r²)), r = |d|·h/eps, on the offsets with
    |d|·h < eps, normalized to unit sum.

    For eps > 1/2 the offsets reach past half the torus; mollify_initial
    folds them back onto the grid.
    """
    if not eps > 0.0:
        raise DomainError("eps", eps, "eps > 0")
    radius = max(int(math.ceil(eps / grid.h)) - 1, 0)
    axis = np.arange(-radius, radius + 1, dtype=float) * grid.h
    mesh = np.meshgrid(*([axis] * grid.dim), indexing="ij")
    r2 = sum(m * m for m in mesh) / (eps * eps)
    inside = r2 < 1.0
    kernel = np.zeros_like(r2)
    kernel[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return kernel / np.sum(kernel)


def periodic_kernel(grid: TorusGrid, kernel: np.ndarray) -> np.ndarray:
    """Kernel summed over its periodic images: entry j holds the weight of offset j mod M."""
    radius = kernel.shape[0] // 2
    index = np.arange(-radius, radius + 1) % grid.points
    folded = np.zeros(grid.shape)
    np.add.at(folded, np.ix_(*([index] * grid.dim)), kernel)
    return folded


def mollify_initial(u0: ScalarField, eps: float) -> ScalarField:
    """Circular convolution with the unit-mass bump of width eps; L^p norms do not grow."""
    grid = u0.grid
    folded = periodic_kernel(grid, mollifier_kernel(grid, eps))
    axes = tuple(range(grid.dim))
    spectrum = spfft.rfftn(u0.values, axes=axes) * spfft.rfftn(folded, axes=axes)
    return ScalarField(grid, spfft.irfftn(spectrum, s=grid.shape, axes=axes))
