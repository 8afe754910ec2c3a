"""
Discrete Operators
==================
Periodic finite-difference operators on the torus lattice.

- grad / div: centered differences; div = −grad* under the cell-sum
  inner product, exactly
- laplacian: (2N+1)-point stencil; biharmonic = laplacian ∘ laplacian
- conservative_div_flux: Rusanov (local Lax–Friedrichs) flux differencing,
  returns ≈ −div B(u), cell sum zero
- degenerate_diffusion: Kirchhoff form D²:Ā(u), cell sum zero

Array-level helpers (suffix _values) work on raw numpy arrays and are what
the time stepper calls in its hot loop; the field-level functions wrap them.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from spde_engine.models.coefficients import DiffusionModel, FluxModel
from spde_engine.models.grid import ScalarField, TorusGrid, VectorField
from spde_engine.models.problem import ProblemSpec
from spde_engine.utils.exceptions import GridMismatchError, UnsupportedConfigurationError


# ================================================================================
# ARRAY-LEVEL STENCILS
# ================================================================================

def _forward(a: np.ndarray, axis: int) -> np.ndarray:
    """a_{i+1} along axis, periodic."""
    return np.roll(a, -1, axis=axis)


def _backward(a: np.ndarray, axis: int) -> np.ndarray:
    """a_{i-1} along axis, periodic."""
    return np.roll(a, 1, axis=axis)


def centered_difference(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (_forward(a, axis) - _backward(a, axis)) / (2.0 * h)


def second_difference(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (_forward(a, axis) - 2.0 * a + _backward(a, axis)) / (h * h)


def mixed_difference(a: np.ndarray, h: float) -> np.ndarray:
    """Centered ∂²/∂x₁∂x₂ on a 2-d array."""
    shifted = _forward(a, 1) - _backward(a, 1)
    return (_forward(shifted, 0) - _backward(shifted, 0)) / (4.0 * h * h)


def grad_values(a: np.ndarray, h: float) -> Tuple[np.ndarray, ...]:
    return tuple(centered_difference(a, axis, h) for axis in range(a.ndim))


def div_values(components: Tuple[np.ndarray, ...], h: float) -> np.ndarray:
    total = np.zeros_like(components[0])
    for axis, component in enumerate(components):
        total = total + centered_difference(component, axis, h)
    return total


def laplacian_values(a: np.ndarray, h: float) -> np.ndarray:
    total = np.zeros_like(a)
    for axis in range(a.ndim):
        total = total + second_difference(a, axis, h)
    return total


def matrix_divergence_values(scalar: np.ndarray, matrix: np.ndarray, h: float) -> np.ndarray:
    """
    div of the matrix field S(x)·M, S scalar: component j is Σ_i M_ij ∂_i S.

    Returns an array of shape (N, *scalar.shape).
    """
    gradient = grad_values(scalar, h)
    dim = scalar.ndim
    return np.stack(
        [sum(matrix[i, j] * gradient[i] for i in range(dim)) for j in range(dim)]
    )


def rusanov_values(u: np.ndarray, flux: FluxModel, h: float) -> np.ndarray:
    """
    −div B(u) by Rusanov flux differencing.

    F_{i+1/2} = ½(B(u_i) + B(u_{i+1})) − ½ λ_{i+1/2} (u_{i+1} − u_i),
    λ_{i+1/2} = max(|b(u_i)|, |b(u_{i+1})|) per axis.
    """
    total = np.zeros_like(u)
    for axis in range(u.ndim):
        if flux.direction[axis] == 0.0:
            continue
        Bu = flux.component(u, axis)
        speed = np.abs(flux.speed_component(u, axis))
        right = _forward(u, axis)
        lam = np.maximum(speed, _forward(speed, axis))
        face = 0.5 * (Bu + _forward(Bu, axis)) - 0.5 * lam * (right - u)
        total = total - (face - _backward(face, axis)) / h
    return total


def kirchhoff_values(u: np.ndarray, diffusion: DiffusionModel, h: float) -> np.ndarray:
    """
    D²:Ā(u) = Σ_ij D_ij ∂_ij K(u), K = ∫₀^ξ a.

    Diagonal entries use the same second-difference stencil as the
    laplacian. Off-diagonal entries need a constant profile.
    """
    matrix = diffusion.matrix
    if not diffusion.is_diagonal and not diffusion.profile.is_constant:
        raise UnsupportedConfigurationError(
            "Off-diagonal diffusion with a state-dependent profile is not supported",
            {"matrix": matrix.tolist(), "profile": diffusion.profile.kind},
        )
    kirchhoff = diffusion.kirchhoff(u)
    total = np.zeros_like(u)
    for axis in range(u.ndim):
        if matrix[axis, axis] != 0.0:
            total = total + matrix[axis, axis] * second_difference(kirchhoff, axis, h)
    if u.ndim == 2 and matrix[0, 1] != 0.0:
        total = total + 2.0 * matrix[0, 1] * mixed_difference(kirchhoff, h)
    return total


# ================================================================================
# FIELD-LEVEL OPERATORS
# ================================================================================

def _same_grid(fields) -> TorusGrid:
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise GridMismatchError(grid.to_dict(), other.grid.to_dict())
    return grid


def grad(u: ScalarField) -> VectorField:
    return tuple(ScalarField(u.grid, c) for c in grad_values(u.values, u.grid.h))


def div(v: VectorField) -> ScalarField:
    grid = _same_grid(v)
    if len(v) != grid.dim:
        raise GridMismatchError((grid.dim,), (len(v),))
    return ScalarField(grid, div_values(tuple(c.values for c in v), grid.h))


def laplacian(u: ScalarField) -> ScalarField:
    return ScalarField(u.grid, laplacian_values(u.values, u.grid.h))


def biharmonic(u: ScalarField) -> ScalarField:
    return ScalarField(u.grid, laplacian_values(laplacian_values(u.values, u.grid.h), u.grid.h))


def conservative_div_flux(u: ScalarField, spec: ProblemSpec) -> ScalarField:
    return ScalarField(u.grid, rusanov_values(u.values, spec.flux, u.grid.h))


def degenerate_diffusion(u: ScalarField, spec: ProblemSpec) -> ScalarField:
    return ScalarField(u.grid, kirchhoff_values(u.values, spec.diffusion, u.grid.h))


def inner(u: ScalarField, v: ScalarField) -> float:
    """Cell-sum inner product Σ_i u_i v_i."""
    u.require_same_grid(v)
    return float(np.sum(u.values * v.values))


def vector_inner(a: VectorField, b: VectorField) -> float:
    _same_grid(tuple(a) + tuple(b))
    return float(sum(np.sum(x.values * y.values) for x, y in zip(a, b)))
