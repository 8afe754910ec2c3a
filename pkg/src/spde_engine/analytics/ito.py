"""
Itô Formula Residual
====================
Both sides of the Itô formula for ⟨φ(u(t)), ψ⟩ along a computed trajectory:

    ⟨φ(u(T)), ψ⟩ − ⟨φ(u₀), ψ⟩
        = ∫ drift dt + Σ_k ∫ ⟨φ′(u) g_k(u), ψ⟩ dβ_k + ½ ∫ ⟨φ″(u) G²(u), ψ⟩ dt

Drift forms:
- discrete: ⟨φ′(u) L_h(u), ψ⟩ with L_h the scheme's full right-hand side
            (Rusanov flux, Kirchhoff diffusion, τΔ_h, −ηΔ_h²)
- split:    du = div G dt + F dt with G = A(u)∇u + τ∇u − B(u), F = −ηΔ²u:
            ⟨φ′(u)F, ψ⟩ − ⟨φ″(u)∇u·G, ψ⟩ − ⟨φ′(u)G, ∇ψ⟩

All time integrals use the left-point rule on the snapshot times, the
stochastic one with the trajectory's own increments.
"""

from __future__ import annotations

import math
from typing import Any, Dict, Optional

import numpy as np

from spde_engine.analytics.hypotheses import effective_spec, phi_n_derivatives
from spde_engine.analytics.operators import (
    grad_values,
    kirchhoff_values,
    laplacian_values,
    rusanov_values,
)
from spde_engine.data.noise import NoisePath, noise_field_values
from spde_engine.models.coefficients import ScalarProfile, cumulative_quadrature, profile_from_dict
from spde_engine.models.grid import Trajectory
from spde_engine.models.problem import ProblemSpec
from spde_engine.models.test_functions import SpatialWeight
from spde_engine.utils.exceptions import ConfigValidationError, DomainError, PreconditionError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)

DRIFT_FORMS = ("discrete", "split")


class PhiN(ScalarProfile):
    """
    C² approximation of |ξ|^p: |ξ|^p on |ξ| <= n, quadratic continuation
    beyond, so φ″ is bounded by p(p−1)n^(p−2).
    """
    kind = "phi-n"

    def __init__(self, n: float = 4.0, p: float = 2.0):
        phi_n_derivatives(0.0, n, p)
        self.n = float(n)
        self.p = float(p)

    def value(self, xi):
        return phi_n_derivatives(xi, self.n, self.p)[0]

    def derivative(self, xi):
        return phi_n_derivatives(xi, self.n, self.p)[1]

    def second_derivative(self, xi):
        return phi_n_derivatives(xi, self.n, self.p)[2]

    def antiderivative(self, xi):
        return cumulative_quadrature(self.value, xi)

    def curvature_bound(self) -> float:
        return self.p * (self.p - 1.0) * self.n ** (self.p - 2.0)

    def to_dict(self):
        return {"type": self.kind, "n": self.n, "p": self.p}


def build_test_profile(data: Dict[str, Any], path: str = "experiment.phi") -> ScalarProfile:
    """Profile from its dict form; "phi-n" is accepted next to the coefficient profiles."""
    if isinstance(data, dict) and data.get("type") == PhiN.kind:
        try:
            return PhiN(n=float(data.get("n", 4.0)), p=float(data.get("p", 2.0)))
        except DomainError as exc:
            raise ConfigValidationError(path, exc.message) from exc
    return profile_from_dict(data, path)


def _discrete_drift(values: np.ndarray, spec: ProblemSpec, eta: float, tau: float, h: float) -> np.ndarray:
    drift = rusanov_values(values, spec.flux, h) + kirchhoff_values(values, spec.diffusion, h)
    if tau:
        drift = drift + tau * laplacian_values(values, h)
    if eta:
        drift = drift - eta * laplacian_values(laplacian_values(values, h), h)
    return drift


def _split_drift(
    values: np.ndarray,
    spec: ProblemSpec,
    phi: ScalarProfile,
    weight: np.ndarray,
    weight_grad,
    eta: float,
    tau: float,
    h: float,
) -> float:
    """Cell sum of φ′F ψ − φ″∇u·G ψ − φ′G·∇ψ (without the h^N factor)."""
    gradient = grad_values(values, h)
    level = spec.diffusion.profile.value(values)
    matrix = spec.diffusion.matrix
    dim = values.ndim
    first = phi.derivative(values)
    second = phi.second_derivative(values)
    total = 0.0
    for i in range(dim):
        G_i = level * sum(matrix[i, j] * gradient[j] for j in range(dim)) + tau * gradient[i]
        G_i = G_i - spec.flux.component(values, i)
        total -= float(np.sum(second * gradient[i] * G_i * weight))
        total -= float(np.sum(first * G_i * weight_grad[i]))
    if eta:
        F = -eta * laplacian_values(laplacian_values(values, h), h)
        total += float(np.sum(first * F * weight))
    return total


def ito_residual_terms(
    traj: Trajectory,
    spec: ProblemSpec,
    path: NoisePath,
    phi: ScalarProfile,
    psi: Optional[SpatialWeight] = None,
    drift: str = "discrete",
    include_ito_correction: bool = True,
) -> Dict[str, Any]:
    """
    Left side, drift, stochastic and correction integrals, and their defect.

    Raises:
        PreconditionError: φ″ is not bounded, or the trajectory has no params
    """
    if drift not in DRIFT_FORMS:
        raise DomainError("drift", drift, f"one of {DRIFT_FORMS}")
    if traj.params is None:
        raise PreconditionError("Trajectory carries no regularization parameters", {"noise": traj.noise})
    bound = phi.curvature_bound()
    if not math.isfinite(bound):
        low, high = traj.state_range()
        raise PreconditionError(
            "Test profile has no bounded second derivative",
            {"profile": phi.kind, "state_range": [low, high]},
        )
    params = traj.params
    effective = effective_spec(spec, params)
    psi = psi or SpatialWeight()
    grid = traj.grid
    h = grid.h
    volume = grid.cell_volume
    coords = grid.coordinates()
    weight = psi.value(coords)
    weight_grad = psi.gradient(coords)

    lhs = volume * float(np.sum((phi.value(traj.snapshots[-1]) - phi.value(traj.snapshots[0])) * weight))
    drift_total = 0.0
    stochastic = 0.0
    correction = 0.0
    steps = traj.step_indices
    for j in range(len(traj) - 1):
        values = traj.snapshots[j]
        dt_j = float(traj.times[j + 1] - traj.times[j])
        if drift == "discrete":
            L = _discrete_drift(values, effective, params.eta, params.tau, h)
            drift_total += dt_j * volume * float(np.sum(phi.derivative(values) * L * weight))
        else:
            drift_total += dt_j * volume * _split_drift(
                values, effective, phi, weight, weight_grad, params.eta, params.tau, h
            )
        if path.modes:
            increments = path.aggregated(int(steps[j]), int(steps[j + 1]))
            noise = noise_field_values(effective, coords, values, increments)
            stochastic += volume * float(np.sum(phi.derivative(values) * noise * weight))
            if include_ito_correction:
                G2 = effective.G2(coords, values, path.modes)
                correction += 0.5 * dt_j * volume * float(np.sum(phi.second_derivative(values) * G2 * weight))

    defect = lhs - (drift_total + stochastic + correction)
    return {
        "lhs": lhs,
        "drift": drift_total,
        "stochastic": stochastic,
        "ito_correction": correction,
        "defect": defect,
        "drift_form": drift,
        "curvature_bound": bound,
    }


def ito_residual(
    traj: Trajectory,
    spec: ProblemSpec,
    path: NoisePath,
    phi: ScalarProfile,
    psi: Optional[SpatialWeight] = None,
    drift: str = "discrete",
    include_ito_correction: bool = True,
    signed: bool = False,
) -> float:
    """Absolute defect of the Itô formula; signed=True keeps the sign for ensemble means."""
    defect = ito_residual_terms(traj, spec, path, phi, psi, drift, include_ito_correction)["defect"]
    return defect if signed else abs(defect)
