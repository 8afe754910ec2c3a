"""
Kinetic Diagnostics
===================
Discrete kinetic formulation of a computed trajectory.

- kinetic_function:    f = 1_{u > ξ} on a velocity grid
- chain_rule_residual: ‖div_h[∫₀^u φ σ] − φ(u)·div_h[∫₀^u σ]‖_{L¹}
- estimate_measures:   parabolic (n₁) and viscous (n₂) dissipation deposited at ξ = u
- vanishing_xi_mass:   measure mass beyond |ξ| > R
- kinetic_residual:    defect of the weak kinetic equation against a tensor
                       test function φ(t, x, ξ) = a(t)·b(x)·c(ξ)

All ξ-integrals of f against c reduce to ∫_{-∞}^{u} (·) c(ξ) dξ, evaluated by
Gauss–Legendre on the support of c, so the residual needs no ξ-grid.
"""

from __future__ import annotations

from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.special import roots_legendre

from spde_engine.analytics.hypotheses import effective_spec
from spde_engine.analytics.metrics.norms import trapezoid_weights
from spde_engine.analytics.operators import grad_values, matrix_divergence_values
from spde_engine.config.settings import KINETIC_DEFAULTS, QUADRATURE_CONFIG
from spde_engine.data.noise import NoisePath, noise_field_values
from spde_engine.models.coefficients import ScalarProfile, cumulative_quadrature
from spde_engine.models.grid import ScalarField, Trajectory
from spde_engine.models.kinetic import KineticField, KineticMeasureEstimate, VelocityGrid
from spde_engine.models.problem import ProblemSpec
from spde_engine.models.test_functions import TensorTestFunction, XiBump
from spde_engine.utils.exceptions import DomainError, PreconditionError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)

TestProfile = Union[ScalarProfile, Callable[[np.ndarray], np.ndarray]]

DEPOSITIONS = ("nearest", "exact")


# ================================================================================
# KINETIC FUNCTION
# ================================================================================

def kinetic_function(u: ScalarField, vgrid: VelocityGrid) -> KineticField:
    """
    f(x_i, ξ_j) = 1 iff u(x_i) > ξ_j.

    Raises:
        VelocityRangeError: ξ_min >= min u or max u > ξ_max
    """
    vgrid.require_coverage(float(np.min(u.values)), float(np.max(u.values)))
    values = (u.values[..., None] > vgrid.nodes).astype(np.int8)
    return KineticField(grid=u.grid, vgrid=vgrid, values=values)


# ================================================================================
# CHAIN RULE
# ================================================================================

def _evaluate(phi: TestProfile, xi: np.ndarray) -> np.ndarray:
    if isinstance(phi, ScalarProfile):
        return phi.value(xi)
    return np.asarray(phi(xi), dtype=float)


def chain_rule_residual(u: ScalarField, spec: ProblemSpec, phi: TestProfile) -> float:
    """
    L¹ norm (Euclidean per cell) of

        div_h[Ψ(u)·√D] − φ(u)·div_h[S(u)·√D],   Ψ = ∫₀ φ·√a,  S = ∫₀ √a

    Both antiderivatives use the same panels, so φ ≡ 1 gives exactly 0.
    """
    diffusion = spec.diffusion
    root_profile = diffusion.sqrt_profile
    xi = u.values
    weighted = cumulative_quadrature(lambda z: _evaluate(phi, z) * root_profile.value(z), xi)
    plain = cumulative_quadrature(root_profile.value, xi)
    h = u.grid.h
    left = matrix_divergence_values(weighted, diffusion.root, h)
    right = _evaluate(phi, xi)[None, ...] * matrix_divergence_values(plain, diffusion.root, h)
    per_cell = np.sqrt(np.sum((left - right) ** 2, axis=0))
    return float(np.sum(per_cell) * u.grid.cell_volume)


# ================================================================================
# KINETIC MEASURES
# ================================================================================

def _spec_for(traj: Trajectory, spec: ProblemSpec) -> ProblemSpec:
    if traj.params is None:
        raise PreconditionError("Trajectory carries no regularization parameters", {"noise": traj.noise})
    return effective_spec(spec, traj.params)


def parabolic_density(values: np.ndarray, spec: ProblemSpec, h: float) -> np.ndarray:
    """|div_h Σ(u)|² per cell, Σ = (∫₀ √a)·√D."""
    sigma_int = spec.diffusion.sqrt_profile.antiderivative(values)
    return np.sum(matrix_divergence_values(sigma_int, spec.diffusion.root, h) ** 2, axis=0)


def viscous_density(values: np.ndarray, tau: float, h: float) -> np.ndarray:
    """τ|∇_h u|² per cell."""
    if tau == 0.0:
        return np.zeros_like(values)
    return tau * sum(g * g for g in grad_values(values, h))


def estimate_measures(
    traj: Trajectory,
    spec: ProblemSpec,
    vgrid: VelocityGrid,
    deposition: str = KINETIC_DEFAULTS['deposition'],
) -> KineticMeasureEstimate:
    """
    Deposit n₁ and n₂ at ξ = u(t_j, x_i) with trapezoid time weights.

    Raises:
        VelocityRangeError: the trajectory leaves the velocity grid
    """
    if deposition not in DEPOSITIONS:
        raise DomainError("deposition", deposition, f"one of {DEPOSITIONS}")
    effective = _spec_for(traj, spec)
    vgrid.require_coverage(*traj.state_range())
    grid = traj.grid
    h = grid.h
    tau = traj.params.tau
    weights = trapezoid_weights(traj.times)
    snapshots = len(traj)
    n1 = np.empty((snapshots, grid.cells))
    n2 = np.empty((snapshots, grid.cells))
    for j in range(snapshots):
        values = traj.snapshots[j]
        scale = grid.cell_volume * weights[j]
        n1[j] = (parabolic_density(values, effective, h) * scale).ravel()
        n2[j] = (viscous_density(values, tau, h) * scale).ravel()
    states = traj.snapshots.reshape(snapshots, grid.cells)
    return KineticMeasureEstimate(
        grid=grid,
        vgrid=vgrid,
        times=traj.times,
        time_weights=weights,
        tau=tau,
        states=np.array(states),
        bin_index=vgrid.bin_index(states),
        n1=n1,
        n2=n2,
        deposition=deposition,
    )


def vanishing_xi_mass(est: KineticMeasureEstimate, R: float) -> float:
    """
    Mass deposited beyond |ξ| > R.

    A nearest-bin deposit counts when its ξ-cell reaches past R, so R = 0
    returns the total mass. Exact deposits count when |u| > R.
    """
    if est.deposition == "exact":
        outside = np.abs(est.states) > R
    else:
        centers = np.abs(est.vgrid.nodes[est.bin_index])
        outside = centers + 0.5 * est.vgrid.spacing > R
    return float(np.sum((est.n1 + est.n2)[outside]))


# ================================================================================
# WEAK-FORM RESIDUAL
# ================================================================================

def _upper_integral(
    fn: Optional[Callable[[np.ndarray], np.ndarray]],
    bump: XiBump,
    values: np.ndarray,
    nodes: int,
) -> np.ndarray:
    """∫_{-∞}^{u} fn(ξ)·c(ξ) dξ per cell; fn = None means fn ≡ 1 (closed form)."""
    if fn is None:
        return bump.integral(values)
    low, high = bump.support
    upper = np.clip(values, low, high)
    t, w = roots_legendre(nodes)
    half = 0.5 * (upper - low)
    z = low + half[..., None] * (t + 1.0)
    integrand = np.asarray(fn(z), dtype=float) * bump.value(z)
    return np.sum(w * integrand, axis=-1) * half


def kinetic_residual_terms(
    traj: Trajectory,
    spec: ProblemSpec,
    path: NoisePath,
    test: TensorTestFunction,
    vgrid: VelocityGrid,
    est: KineticMeasureEstimate,
    nodes: int = QUADRATURE_CONFIG['test_function_nodes'],
) -> Dict[str, float]:
    """
    Every term of the weak kinetic equation

        ∫⟨f, ∂_tφ⟩ + ⟨f₀, φ(0)⟩ + ∫⟨f, b·∇φ⟩ + ∫⟨f, A:D²φ⟩ + τ∫⟨f, Δφ⟩
            = −Σ_k ∫∫ g_k φ(u) dx dβ_k − ½ ∫∫ G² ∂_ξφ(u) dx dt + m(∂_ξφ)

    for φ = a(t)·b(x)·c(ξ). The first two terms are assembled together by
    summation by parts; dt-integrals use trapezoid weights and the
    stochastic sum the left-point rule with the path's own increments.

    Raises:
        PreconditionError: η > 0 (no kinetic form), or c not supported in vgrid
    """
    params = traj.params
    effective = _spec_for(traj, spec)
    if params.eta > 0:
        raise PreconditionError("Fourth-order regularization has no kinetic formulation", {"eta": params.eta})
    bump = test.velocity
    low, high = bump.support
    if low < vgrid.xi_min or high > vgrid.xi_max:
        raise PreconditionError(
            "Test function support leaves the velocity grid",
            {"support": [low, high], "velocity_grid": vgrid.to_dict()},
        )
    if abs(path.dt - params.dt) > 1e-12 * params.dt:
        raise DomainError("path.dt", path.dt, f"equal to params.dt={params.dt!r}")

    grid = traj.grid
    coords = grid.coordinates()
    volume = grid.cell_volume
    cutoff = test.cutoff(traj.times[-1])
    a_t = cutoff.value(traj.times)
    weights = trapezoid_weights(traj.times)
    spatial = test.spatial
    b_x = spatial.value(coords)
    grad_b = spatial.gradient(coords)
    hessian_b = spatial.hessian(coords)
    direction = effective.flux.direction
    matrix = effective.diffusion.matrix
    transport_weight = sum(direction[i] * grad_b[i] for i in range(grid.dim))
    diffusion_weight = sum(matrix[i, j] * hessian_b[i, j] for i in range(grid.dim) for j in range(grid.dim))
    laplacian_b = spatial.laplacian(coords)
    flux_speed = effective.flux.profile.derivative
    diffusion_level = effective.diffusion.profile.value

    totals = dict.fromkeys(("time", "transport", "diffusion", "viscosity", "stochastic", "ito", "measure"), 0.0)
    previous_F = 0.0
    for j in range(len(traj)):
        values = traj.snapshots[j]
        F = volume * float(np.sum(b_x * bump.integral(values)))
        if j > 0:
            totals["time"] -= a_t[j - 1] * (F - previous_F)
        previous_F = F
        w = weights[j] * a_t[j]
        if w == 0.0:
            continue
        totals["transport"] += w * volume * float(
            np.sum(transport_weight * _upper_integral(flux_speed, bump, values, nodes))
        )
        totals["diffusion"] += w * volume * float(
            np.sum(diffusion_weight * _upper_integral(diffusion_level, bump, values, nodes))
        )
        if params.tau > 0:
            totals["viscosity"] += w * volume * params.tau * float(np.sum(laplacian_b * bump.integral(values)))
        if path.modes:
            G2 = effective.G2(coords, values, path.modes)
            totals["ito"] += 0.5 * w * volume * float(np.sum(b_x * bump.derivative(values) * G2))

    if path.modes:
        steps = traj.step_indices
        for j in range(1, len(traj)):
            values = traj.snapshots[j - 1]
            increments = path.aggregated(int(steps[j - 1]), int(steps[j]))
            noise = noise_field_values(effective, coords, values, increments)
            totals["stochastic"] += a_t[j - 1] * volume * float(np.sum(b_x * bump.value(values) * noise))

    deposits = est.deposit_points().reshape((len(est.times),) + grid.shape)
    masses = (est.n1 + est.n2).reshape(deposits.shape)
    for j in range(len(est.times)):
        totals["measure"] += cutoff.value(est.times[j]) * float(
            np.sum(masses[j] * b_x * bump.derivative(deposits[j]))
        )

    lhs = totals["time"] + totals["transport"] + totals["diffusion"] + totals["viscosity"]
    rhs = -totals["stochastic"] - totals["ito"] + totals["measure"]
    totals["defect"] = lhs - rhs
    return totals


def kinetic_residual(
    traj: Trajectory,
    spec: ProblemSpec,
    path: NoisePath,
    test: TensorTestFunction,
    vgrid: VelocityGrid,
    est: KineticMeasureEstimate,
    signed: bool = False,
) -> float:
    """Absolute defect of the weak kinetic equation; signed=True keeps the sign for ensemble means."""
    defect = kinetic_residual_terms(traj, spec, path, test, vgrid, est)["defect"]
    return defect if signed else abs(defect)
