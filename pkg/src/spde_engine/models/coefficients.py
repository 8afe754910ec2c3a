"""
Coefficient Models
==================
Scalar-argument building blocks of a problem specification.

Every coefficient of the equation depends on the state ξ only (flux B,
diffusion A) or on (x, ξ) (noise g_k). Scalar profiles carry value,
derivative, second derivative and the antiderivative ∫₀^ξ, in closed form
where the catalog allows it and by composite Gauss–Legendre otherwise.

- Scalar profiles: Affine, Quadratic, AbsValue, ClippedQuadratic, ClippedAbs,
  Constant, Truncated, Mollified, SqrtProfile, CallableProfile
- FluxModel: B(ξ) = p(ξ)·d for a fixed direction d ∈ ℝ^N
- DiffusionModel: A(ξ) = a(ξ)·D for a symmetric matrix D
- Noise models: ZeroNoise, AdditiveNoise, MultiplicativeNoise, HarmonicLinearNoise
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Type

import numpy as np
from scipy.special import roots_legendre, zeta

from spde_engine.config.settings import QUADRATURE_CONFIG
from spde_engine.utils.exceptions import (
    ConfigValidationError,
    DomainError,
    UnsupportedConfigurationError,
)


# ================================================================================
# QUADRATURE HELPERS
# ================================================================================

@lru_cache(maxsize=16)
def _legendre_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre rule on [0, 1], symmetrized about 1/2."""
    t, w = roots_legendre(nodes)
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    return 0.5 * (t + 1.0), 0.5 * w


@lru_cache(maxsize=16)
def mollifier_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes z_i in (-1, 1) and weights W_i of the bump ρ(z) = exp(-1/(1-z²)),
    normalized so that Σ W_i = 1. The rule is symmetric, so Σ W_i z_i = 0.
    """
    t, w = roots_legendre(nodes)
    z = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    rho = np.exp(-1.0 / (1.0 - z * z))
    weights = w * rho
    weights = weights / np.sum(weights)
    return z, weights


def cumulative_quadrature(
    fn: Callable[[np.ndarray], np.ndarray],
    xi: Any,
    panel_width: Optional[float] = None,
    nodes: Optional[int] = None,
) -> np.ndarray:
    """
    ∫₀^ξ fn(ζ) dζ for every entry of xi, composite Gauss–Legendre.

    [0, ξ] is split into n equal panels with n = ceil(max|ξ| / panel_width),
    the same n for every entry, so equal integrands give bit-identical results.
    """
    xi = np.asarray(xi, dtype=float)
    width = panel_width or QUADRATURE_CONFIG['panel_width']
    t, w = _legendre_rule(nodes or QUADRATURE_CONFIG['panel_nodes'])
    span = float(np.max(np.abs(xi))) if xi.size else 0.0
    panels = max(1, int(math.ceil(span / width)))
    step = xi / panels
    total = np.zeros_like(xi)
    for p in range(panels):
        left = step * p
        z = left[..., None] + step[..., None] * t
        total = total + np.sum(w * np.asarray(fn(z), dtype=float), axis=-1) * step
    return total


# ================================================================================
# SCALAR PROFILES
# ================================================================================

class ScalarProfile(ABC):
    """
    Real function of the state variable ξ, vectorized over numpy arrays.

    Subclasses implement value/derivative/antiderivative; antiderivative is
    ∫₀^ξ so that profile.antiderivative(0) == 0.
    """

    kind: str = "abstract"
    is_constant: bool = False
    is_affine: bool = False

    @abstractmethod
    def value(self, xi: Any) -> np.ndarray: ...

    @abstractmethod
    def derivative(self, xi: Any) -> np.ndarray: ...

    @abstractmethod
    def antiderivative(self, xi: Any) -> np.ndarray: ...

    def second_derivative(self, xi: Any) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        step = 1e-4 * (1.0 + np.abs(xi))
        return (self.derivative(xi + step) - self.derivative(xi - step)) / (2.0 * step)

    def curvature_bound(self) -> float:
        """sup_ξ |φ″(ξ)|; math.inf when unbounded or not C²."""
        return math.inf

    def sqrt_profile(self) -> "ScalarProfile":
        """Profile of sqrt(max(value, 0))."""
        return SqrtProfile(self)

    def __call__(self, xi: Any) -> np.ndarray:
        return self.value(xi)

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalarProfile):
            return NotImplemented
        try:
            return self.to_dict() == other.to_dict()
        except UnsupportedConfigurationError:
            return self is other

    def __hash__(self) -> int:
        return id(self)


def _as_array(xi: Any) -> np.ndarray:
    return np.asarray(xi, dtype=float)


class Constant(ScalarProfile):
    kind = "constant"
    is_constant = True
    is_affine = True

    def __init__(self, level: float = 1.0):
        self.level = float(level)

    def value(self, xi):
        return np.full_like(_as_array(xi), self.level)

    def derivative(self, xi):
        return np.zeros_like(_as_array(xi))

    def second_derivative(self, xi):
        return np.zeros_like(_as_array(xi))

    def antiderivative(self, xi):
        return self.level * _as_array(xi)

    def curvature_bound(self) -> float:
        return 0.0

    def sqrt_profile(self) -> ScalarProfile:
        return Constant(math.sqrt(max(self.level, 0.0)))

    def to_dict(self):
        return {"type": self.kind, "level": self.level}


class Affine(ScalarProfile):
    """slope·ξ + intercept."""
    kind = "affine"
    is_affine = True

    def __init__(self, slope: float = 1.0, intercept: float = 0.0):
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.is_constant = self.slope == 0.0

    def value(self, xi):
        return self.slope * _as_array(xi) + self.intercept

    def derivative(self, xi):
        return np.full_like(_as_array(xi), self.slope)

    def second_derivative(self, xi):
        return np.zeros_like(_as_array(xi))

    def antiderivative(self, xi):
        xi = _as_array(xi)
        return 0.5 * self.slope * xi * xi + self.intercept * xi

    def curvature_bound(self) -> float:
        return 0.0

    def to_dict(self):
        return {"type": self.kind, "slope": self.slope, "intercept": self.intercept}


class Quadratic(ScalarProfile):
    """scale·ξ²; Burgers flux is Quadratic(0.5)."""
    kind = "quadratic"

    def __init__(self, scale: float = 0.5):
        self.scale = float(scale)

    def value(self, xi):
        xi = _as_array(xi)
        return self.scale * xi * xi

    def derivative(self, xi):
        return 2.0 * self.scale * _as_array(xi)

    def second_derivative(self, xi):
        return np.full_like(_as_array(xi), 2.0 * self.scale)

    def antiderivative(self, xi):
        xi = _as_array(xi)
        return self.scale * xi ** 3 / 3.0

    def curvature_bound(self) -> float:
        return 2.0 * abs(self.scale)

    def sqrt_profile(self) -> ScalarProfile:
        if self.scale >= 0:
            return AbsValue(math.sqrt(self.scale))
        return Constant(0.0)

    def to_dict(self):
        return {"type": self.kind, "scale": self.scale}


class AbsValue(ScalarProfile):
    """scale·|ξ|."""
    kind = "abs"

    def __init__(self, scale: float = 1.0):
        self.scale = float(scale)

    def value(self, xi):
        return self.scale * np.abs(_as_array(xi))

    def derivative(self, xi):
        return self.scale * np.sign(_as_array(xi))

    def second_derivative(self, xi):
        return np.zeros_like(_as_array(xi))

    def antiderivative(self, xi):
        xi = _as_array(xi)
        return 0.5 * self.scale * xi * np.abs(xi)

    def to_dict(self):
        return {"type": self.kind, "scale": self.scale}


class ClippedQuadratic(ScalarProfile):
    """min(scale·ξ², cap): porous-medium-like degenerate diffusion, bounded."""
    kind = "clipped-quadratic"

    def __init__(self, cap: float = 1.0, scale: float = 1.0):
        if cap <= 0 or scale <= 0:
            raise DomainError("clipped-quadratic", {"cap": cap, "scale": scale}, "cap > 0, scale > 0")
        self.cap = float(cap)
        self.scale = float(scale)
        self.knee = math.sqrt(self.cap / self.scale)

    def value(self, xi):
        xi = _as_array(xi)
        return np.minimum(self.scale * xi * xi, self.cap)

    def derivative(self, xi):
        xi = _as_array(xi)
        return np.where(np.abs(xi) < self.knee, 2.0 * self.scale * xi, 0.0)

    def second_derivative(self, xi):
        xi = _as_array(xi)
        return np.where(np.abs(xi) < self.knee, 2.0 * self.scale, 0.0)

    def antiderivative(self, xi):
        xi = _as_array(xi)
        r = self.knee
        inner = self.scale * xi ** 3 / 3.0
        outer = np.sign(xi) * (self.scale * r ** 3 / 3.0 + self.cap * (np.abs(xi) - r))
        return np.where(np.abs(xi) <= r, inner, outer)

    def curvature_bound(self) -> float:
        return 2.0 * self.scale

    def sqrt_profile(self) -> ScalarProfile:
        return ClippedAbs(cap=math.sqrt(self.cap), scale=math.sqrt(self.scale))

    def to_dict(self):
        return {"type": self.kind, "cap": self.cap, "scale": self.scale}


class ClippedAbs(ScalarProfile):
    """min(scale·|ξ|, cap)."""
    kind = "clipped-abs"

    def __init__(self, cap: float = 1.0, scale: float = 1.0):
        if cap <= 0 or scale <= 0:
            raise DomainError("clipped-abs", {"cap": cap, "scale": scale}, "cap > 0, scale > 0")
        self.cap = float(cap)
        self.scale = float(scale)
        self.knee = self.cap / self.scale

    def value(self, xi):
        return np.minimum(self.scale * np.abs(_as_array(xi)), self.cap)

    def derivative(self, xi):
        xi = _as_array(xi)
        return np.where(np.abs(xi) < self.knee, self.scale * np.sign(xi), 0.0)

    def second_derivative(self, xi):
        return np.zeros_like(_as_array(xi))

    def antiderivative(self, xi):
        xi = _as_array(xi)
        r = self.knee
        inner = 0.5 * self.scale * xi * np.abs(xi)
        outer = np.sign(xi) * (0.5 * self.scale * r * r + self.cap * (np.abs(xi) - r))
        return np.where(np.abs(xi) <= r, inner, outer)

    def to_dict(self):
        return {"type": self.kind, "cap": self.cap, "scale": self.scale}


class Truncated(ScalarProfile):
    """
    B^R: equal to the base on [-R, R], continued linearly (C¹) outside.

    With c = clip(ξ, -R, R) and d = ξ - c:
        B^R(ξ) = B(c) + b(c)·d
    """
    kind = "truncated"

    def __init__(self, base: ScalarProfile, radius: float):
        if not radius > 0:
            raise DomainError("R", radius, "R > 0")
        self.base = base
        self.radius = float(radius)
        self.is_affine = base.is_affine
        self.is_constant = base.is_constant

    def _split(self, xi):
        xi = _as_array(xi)
        c = np.clip(xi, -self.radius, self.radius)
        return c, xi - c

    def value(self, xi):
        c, d = self._split(xi)
        return self.base.value(c) + self.base.derivative(c) * d

    def derivative(self, xi):
        c, _ = self._split(xi)
        return self.base.derivative(c)

    def second_derivative(self, xi):
        xi = _as_array(xi)
        inside = np.abs(xi) < self.radius
        return np.where(inside, self.base.second_derivative(np.clip(xi, -self.radius, self.radius)), 0.0)

    def antiderivative(self, xi):
        c, d = self._split(xi)
        return self.base.antiderivative(c) + self.base.value(c) * d + 0.5 * self.base.derivative(c) * d * d

    def lipschitz_constant(self, samples: int = 4001) -> float:
        """sup_{|ξ|<=R} |b(ξ)|, sampled."""
        xi = np.linspace(-self.radius, self.radius, samples)
        return float(np.max(np.abs(self.base.derivative(xi))))

    def curvature_bound(self) -> float:
        return self.base.curvature_bound()

    def to_dict(self):
        return {"type": self.kind, "radius": self.radius, "base": self.base.to_dict()}


class Mollified(ScalarProfile):
    """
    Convolution in ξ with ρ_η(ζ) = ρ(ζ/η)/η, ρ the normalized bump on (-1, 1).

    Evaluated with a symmetric Gauss–Legendre rule, so affine maps are
    reproduced up to roundoff.
    """
    kind = "mollified"

    def __init__(self, base: ScalarProfile, eta: float, nodes: Optional[int] = None):
        if not 0 < eta < 1:
            raise DomainError("eta", eta, "0 < eta < 1")
        self.base = base
        self.eta = float(eta)
        self.nodes = int(nodes or QUADRATURE_CONFIG['mollifier_nodes'])
        self.is_affine = base.is_affine
        self.is_constant = base.is_constant

    def _shifts(self, xi):
        z, weights = mollifier_rule(self.nodes)
        return _as_array(xi)[..., None] - self.eta * z, weights

    def value(self, xi):
        shifted, weights = self._shifts(xi)
        return np.sum(weights * self.base.value(shifted), axis=-1)

    def derivative(self, xi):
        shifted, weights = self._shifts(xi)
        return np.sum(weights * self.base.derivative(shifted), axis=-1)

    def second_derivative(self, xi):
        shifted, weights = self._shifts(xi)
        return np.sum(weights * self.base.second_derivative(shifted), axis=-1)

    def antiderivative(self, xi):
        shifted, weights = self._shifts(xi)
        z, _ = mollifier_rule(self.nodes)
        origin = self.base.antiderivative(-self.eta * z)
        return np.sum(weights * (self.base.antiderivative(shifted) - origin), axis=-1)

    def curvature_bound(self) -> float:
        return self.base.curvature_bound()

    def sqrt_profile(self) -> ScalarProfile:
        if self.is_constant:
            level = float(self.value(0.0))
            return Constant(math.sqrt(max(level, 0.0)))
        return SqrtProfile(self)

    def to_dict(self):
        return {"type": self.kind, "eta": self.eta, "nodes": self.nodes, "base": self.base.to_dict()}


class SqrtProfile(ScalarProfile):
    """sqrt(max(base, 0)); antiderivative by composite Gauss–Legendre."""
    kind = "sqrt"

    def __init__(self, base: ScalarProfile):
        self.base = base
        self.is_constant = base.is_constant

    def value(self, xi):
        return np.sqrt(np.maximum(self.base.value(xi), 0.0))

    def derivative(self, xi):
        root = self.value(xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(root > 0, self.base.derivative(xi) / (2.0 * root), 0.0)
        return slope

    def antiderivative(self, xi):
        return cumulative_quadrature(self.value, xi)

    def to_dict(self):
        return {"type": self.kind, "base": self.base.to_dict()}


class CallableProfile(ScalarProfile):
    """
    Black-box profile around a vectorized callable.

    Missing derivatives fall back to central differences, a missing
    antiderivative to composite Gauss–Legendre. Not serializable.
    """
    kind = "callable"

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        second_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        curvature_bound: float = math.inf,
        name: str = "callable",
    ):
        self.fn = fn
        self._derivative = derivative
        self._antiderivative = antiderivative
        self._second = second_derivative
        self._curvature_bound = float(curvature_bound)
        self.name = name

    def value(self, xi):
        return np.asarray(self.fn(_as_array(xi)), dtype=float)

    def derivative(self, xi):
        xi = _as_array(xi)
        if self._derivative is not None:
            return np.asarray(self._derivative(xi), dtype=float)
        step = 1e-6 * (1.0 + np.abs(xi))
        return (self.value(xi + step) - self.value(xi - step)) / (2.0 * step)

    def second_derivative(self, xi):
        if self._second is not None:
            return np.asarray(self._second(_as_array(xi)), dtype=float)
        return super().second_derivative(xi)

    def antiderivative(self, xi):
        if self._antiderivative is not None:
            xi = _as_array(xi)
            return np.asarray(self._antiderivative(xi), dtype=float) - float(self._antiderivative(np.zeros(())))
        return cumulative_quadrature(self.value, xi)

    def curvature_bound(self) -> float:
        return self._curvature_bound

    def to_dict(self):
        raise UnsupportedConfigurationError(
            f"Callable profile '{self.name}' cannot be serialized",
            {"profile": self.name},
        )


PROFILE_TYPES: Dict[str, Type[ScalarProfile]] = {
    cls.kind: cls
    for cls in (Constant, Affine, Quadratic, AbsValue, ClippedQuadratic, ClippedAbs,
                Truncated, Mollified, SqrtProfile)
}


def profile_from_dict(data: Dict[str, Any], path: str = "profile") -> ScalarProfile:
    """Rebuild a profile from its to_dict() form."""
    if not isinstance(data, dict) or "type" not in data:
        raise ConfigValidationError(path, "expected a mapping with a 'type' entry")
    kind = data["type"]
    params = {k: v for k, v in data.items() if k != "type"}
    if kind not in PROFILE_TYPES:
        raise ConfigValidationError(f"{path}.type", f"unknown profile type '{kind}'")
    if "base" in params:
        params["base"] = profile_from_dict(params["base"], f"{path}.base")
    try:
        return PROFILE_TYPES[kind](**params)
    except TypeError as exc:
        raise ConfigValidationError(path, str(exc)) from exc


# ================================================================================
# FLUX AND DIFFUSION
# ================================================================================

class FluxModel:
    """B(ξ) = p(ξ)·d, b(ξ) = p′(ξ)·d."""

    def __init__(self, profile: ScalarProfile, direction: Sequence[float]):
        self.profile = profile
        self.direction = np.array(direction, dtype=float).reshape(-1)
        self.direction.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.direction.size)

    def value(self, xi: Any) -> np.ndarray:
        return self.profile.value(xi)[..., None] * self.direction

    def derivative(self, xi: Any) -> np.ndarray:
        return self.profile.derivative(xi)[..., None] * self.direction

    def component(self, xi: Any, axis: int) -> np.ndarray:
        return self.profile.value(xi) * self.direction[axis]

    def speed_component(self, xi: Any, axis: int) -> np.ndarray:
        return self.profile.derivative(xi) * self.direction[axis]

    def speed(self, xi: Any) -> np.ndarray:
        """|b(ξ)|."""
        return np.abs(self.profile.derivative(xi)) * float(np.linalg.norm(self.direction))

    def with_profile(self, profile: ScalarProfile) -> "FluxModel":
        return FluxModel(profile, self.direction)

    def to_dict(self) -> Dict[str, Any]:
        return {"profile": self.profile.to_dict(), "direction": self.direction.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "flux") -> "FluxModel":
        return cls(profile_from_dict(data.get("profile"), f"{path}.profile"), data.get("direction", [1.0]))


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric square root after clipping negative eigenvalues to 0."""
    eigenvalues, vectors = np.linalg.eigh(matrix)
    return (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.T


class DiffusionModel:
    """
    A(ξ) = a(ξ)·D with D symmetric; σ(ξ) = sqrt(a(ξ))·sqrt(D).

    Kirchhoff form: Ā(ξ) = ∫₀^ξ A = (∫₀^ξ a)·D. Σ(ξ) = ∫₀^ξ σ = (∫₀^ξ sqrt a)·sqrt(D).
    """

    def __init__(self, profile: ScalarProfile, matrix: Any):
        self.profile = profile
        base = np.atleast_2d(np.array(matrix, dtype=float))
        if base.shape[0] != base.shape[1]:
            raise DomainError("diffusion.matrix", base.shape, "square matrix")
        if not np.allclose(base, base.T, rtol=0, atol=1e-14):
            raise DomainError("diffusion.matrix", base.tolist(), "symmetric matrix")
        self.matrix = base
        self.matrix.setflags(write=False)
        self.root = psd_sqrt(base)
        self.root.setflags(write=False)
        self.sqrt_profile = profile.sqrt_profile()

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self.matrix == np.diag(np.diag(self.matrix))))

    def value(self, xi: Any) -> np.ndarray:
        return self.profile.value(xi)[..., None, None] * self.matrix

    def kirchhoff(self, xi: Any) -> np.ndarray:
        """Scalar part ∫₀^ξ a of Ā."""
        return self.profile.antiderivative(xi)

    def antiderivative(self, xi: Any) -> np.ndarray:
        return self.kirchhoff(xi)[..., None, None] * self.matrix

    def sigma(self, xi: Any) -> np.ndarray:
        return self.sqrt_profile.value(xi)[..., None, None] * self.root

    def sigma_antiderivative(self, xi: Any) -> np.ndarray:
        return self.sqrt_profile.antiderivative(xi)[..., None, None] * self.root

    def norm(self, xi: Any) -> np.ndarray:
        """Spectral norm ‖A(ξ)‖₂."""
        return np.abs(self.profile.value(xi)) * float(np.linalg.norm(self.matrix, 2))

    def with_profile(self, profile: ScalarProfile) -> "DiffusionModel":
        return DiffusionModel(profile, self.matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {"profile": self.profile.to_dict(), "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "diffusion") -> "DiffusionModel":
        return cls(profile_from_dict(data.get("profile"), f"{path}.profile"), data.get("matrix", [[1.0]]))


# ================================================================================
# NOISE MODELS
# ================================================================================

def mode_amplitudes(amplitude: float, decay: float, modes: int) -> np.ndarray:
    """c_k = amplitude · k^(-decay), k = 1..modes."""
    k = np.arange(1, modes + 1, dtype=float)
    return amplitude * k ** (-decay)


class NoiseModel(ABC):
    """
    Family {g_k(x, ξ)}, k >= 1, evaluable for any number of modes.

    Constants returned by growth_constant / modulus_constant are valid
    upper bounds for the K-mode truncation.
    """

    kind: str = "abstract"
    is_zero: bool = False

    @abstractmethod
    def coefficients(self, modes: int, coords: Tuple[np.ndarray, ...], u: np.ndarray) -> np.ndarray:
        """Array of shape (modes, *u.shape) with g_k(x, u(x))."""

    @abstractmethod
    def growth_constant(self, modes: int) -> float:
        """C_G with Σ_k g_k(x,ξ)² <= C_G (1 + ξ²)."""

    @abstractmethod
    def modulus_constant(self, modes: int) -> float:
        """C_h with Σ_k |g_k(x,ξ) - g_k(y,ζ)|² <= C_h (|x-y|² + |ξ-ζ|^(1+α)) for |ξ-ζ| < 1."""

    @abstractmethod
    def tail_bound(self, modes: int, xi: Any) -> np.ndarray:
        """sup_x Σ_{k>modes} g_k(x, ξ)²."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NoiseModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(self.kind)


class ZeroNoise(NoiseModel):
    kind = "zero"
    is_zero = True

    def coefficients(self, modes, coords, u):
        return np.zeros((modes,) + np.shape(u))

    def growth_constant(self, modes):
        return 0.0

    def modulus_constant(self, modes):
        return 0.0

    def tail_bound(self, modes, xi):
        return np.zeros_like(_as_array(xi))

    def to_dict(self):
        return {"type": self.kind}


class AdditiveNoise(NoiseModel):
    """g_k = c_k = amplitude · k^(-decay)."""
    kind = "additive"

    def __init__(self, amplitude: float = 1.0, decay: float = 1.0):
        self.amplitude = float(amplitude)
        self.decay = float(decay)

    def coefficients(self, modes, coords, u):
        c = mode_amplitudes(self.amplitude, self.decay, modes)
        return np.broadcast_to(c.reshape((modes,) + (1,) * np.ndim(u)), (modes,) + np.shape(u)).copy()

    def growth_constant(self, modes):
        return float(np.sum(mode_amplitudes(self.amplitude, self.decay, modes) ** 2))

    def modulus_constant(self, modes):
        return 0.0

    def tail_bound(self, modes, xi):
        tail = self.amplitude ** 2 * zeta(2.0 * self.decay, modes + 1) if self.decay > 0.5 else math.inf
        return np.full_like(_as_array(xi), tail)

    def to_dict(self):
        return {"type": self.kind, "amplitude": self.amplitude, "decay": self.decay}


class MultiplicativeNoise(NoiseModel):
    """g_k(x, ξ) = c_k · sin(2πk·x₁) · scale·ξ/(1+ξ²)."""
    kind = "multiplicative"

    def __init__(self, amplitude: float = 1.0, decay: float = 2.0, scale: float = 1.0):
        self.amplitude = float(amplitude)
        self.decay = float(decay)
        self.scale = float(scale)

    def _state_factor(self, u):
        u = _as_array(u)
        return self.scale * u / (1.0 + u * u)

    def coefficients(self, modes, coords, u):
        c = mode_amplitudes(self.amplitude, self.decay, modes)
        k = np.arange(1, modes + 1, dtype=float).reshape((modes,) + (1,) * np.ndim(u))
        spatial = np.sin(2.0 * np.pi * k * coords[0][None, ...])
        return c.reshape(k.shape) * spatial * self._state_factor(u)[None, ...]

    def growth_constant(self, modes):
        c = mode_amplitudes(self.amplitude, self.decay, modes)
        return float(np.sum(c ** 2)) * self.scale ** 2 / 4.0

    def modulus_constant(self, modes):
        c = mode_amplitudes(self.amplitude, self.decay, modes)
        k = np.arange(1, modes + 1, dtype=float)
        spatial = math.pi ** 2 * float(np.sum(c ** 2 * k ** 2))
        return 2.0 * self.scale ** 2 * max(spatial, float(np.sum(c ** 2)))

    def tail_bound(self, modes, xi):
        tail = self.amplitude ** 2 * zeta(2.0 * self.decay, modes + 1) if self.decay > 0.5 else math.inf
        return tail * self._state_factor(xi) ** 2

    def to_dict(self):
        return {"type": self.kind, "amplitude": self.amplitude, "decay": self.decay, "scale": self.scale}


class HarmonicLinearNoise(NoiseModel):
    """g_k(x, ξ) = (c/k)(1 + |ξ|)."""
    kind = "harmonic-linear"

    def __init__(self, c: float = 1.0):
        self.c = float(c)

    def coefficients(self, modes, coords, u):
        k = np.arange(1, modes + 1, dtype=float).reshape((modes,) + (1,) * np.ndim(u))
        return (self.c / k) * (1.0 + np.abs(_as_array(u)))[None, ...]

    def _harmonic_sum(self, modes):
        return float(np.sum(1.0 / np.arange(1, modes + 1, dtype=float) ** 2)) if modes else 0.0

    def growth_constant(self, modes):
        return 2.0 * self.c ** 2 * self._harmonic_sum(modes)

    def modulus_constant(self, modes):
        return self.c ** 2 * self._harmonic_sum(modes)

    def tail_bound(self, modes, xi):
        return self.c ** 2 * zeta(2.0, modes + 1) * (1.0 + np.abs(_as_array(xi))) ** 2

    def to_dict(self):
        return {"type": self.kind, "c": self.c}


class MollifiedNoise(NoiseModel):
    """
    g_k^η(x, ξ) = ∫ g_k(x, ξ − ζ) ρ_η(ζ) dζ, same rule as Mollified.

    Jensen keeps the modulus constant; (|ξ| + η)² <= 2(1 + ξ²) for η < 1
    doubles the growth constant.
    """
    kind = "mollified"

    def __init__(self, base: NoiseModel, eta: float, nodes: Optional[int] = None):
        if not 0 < eta < 1:
            raise DomainError("eta", eta, "0 < eta < 1")
        self.base = base
        self.eta = float(eta)
        self.nodes = int(nodes or QUADRATURE_CONFIG['mollifier_nodes'])
        self.is_zero = base.is_zero

    def coefficients(self, modes, coords, u):
        z, weights = mollifier_rule(self.nodes)
        u = _as_array(u)
        total = np.zeros((modes,) + u.shape)
        for node, weight in zip(z, weights):
            total = total + weight * self.base.coefficients(modes, coords, u - self.eta * node)
        return total

    def growth_constant(self, modes):
        return 2.0 * self.base.growth_constant(modes)

    def modulus_constant(self, modes):
        return self.base.modulus_constant(modes)

    def tail_bound(self, modes, xi):
        z, _ = mollifier_rule(self.nodes)
        xi = _as_array(xi)
        return np.max(np.stack([self.base.tail_bound(modes, xi - self.eta * node) for node in z]), axis=0)

    def to_dict(self):
        return {"type": self.kind, "eta": self.eta, "nodes": self.nodes, "base": self.base.to_dict()}


NOISE_TYPES: Dict[str, Type[NoiseModel]] = {
    cls.kind: cls
    for cls in (ZeroNoise, AdditiveNoise, MultiplicativeNoise, HarmonicLinearNoise, MollifiedNoise)
}


def noise_from_dict(data: Dict[str, Any], path: str = "noise") -> NoiseModel:
    if not isinstance(data, dict) or "type" not in data:
        raise ConfigValidationError(path, "expected a mapping with a 'type' entry")
    kind = data["type"]
    if kind not in NOISE_TYPES:
        raise ConfigValidationError(f"{path}.type", f"unknown noise type '{kind}'")
    params = {k: v for k, v in data.items() if k != "type"}
    if "base" in params:
        params["base"] = noise_from_dict(params["base"], f"{path}.base")
    try:
        return NOISE_TYPES[kind](**params)
    except TypeError as exc:
        raise ConfigValidationError(path, str(exc)) from exc
