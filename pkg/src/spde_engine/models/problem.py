"""
Problem Specification
=====================
The coefficient tuple (B, b, A, σ, {g_k}, u₀) of

    du + div(B(u)) dt = div(A(u)∇u) dt + Φ(u) dW   on 𝕋^N

together with the hypothesis constants (C_σ, γ, C_G, α, C_h, ...) and the
built-in catalog of named problems.

Catalog keys:
    heat, linear-transport, burgers, burgers-degenerate,
    degenerate-multiplicative, additive-heat, harmonic-heat
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from spde_engine.config.settings import NOISE_DEFAULTS
from spde_engine.models.coefficients import (
    AdditiveNoise,
    Affine,
    ClippedQuadratic,
    Constant,
    DiffusionModel,
    FluxModel,
    HarmonicLinearNoise,
    MultiplicativeNoise,
    NoiseModel,
    Quadratic,
    ZeroNoise,
    noise_from_dict,
)
from spde_engine.models.grid import ScalarField, TorusGrid
from spde_engine.utils.exceptions import (
    ConfigValidationError,
    DomainError,
    UnsupportedConfigurationError,
)


# ================================================================================
# HYPOTHESIS CONSTANTS
# ================================================================================

@dataclass(frozen=True)
class HypothesisConstants:
    """
    Constants the audit compares observations against.

    - |b(ξ)| <= C_B (1 + |ξ|^(p_B - 1))
    - |σ(ξ) - σ(ζ)| <= C_σ |ξ - ζ|^γ for |ξ - ζ| < 1, |σ| <= σ_max
    - Σ_k g_k(x,ξ)² <= C_G (1 + ξ²)
    - Σ_k |g_k(x,ξ) - g_k(y,ζ)|² <= C_h (|x-y|² + |ξ-ζ|^(1+α))
    """
    gamma: float = 1.0
    C_sigma: float = 1.0
    sigma_max: float = 1.0
    C_G: float = 0.0
    alpha: float = 1.0
    C_h: float = 0.0
    C_B: float = 1.0
    p_B: float = 1.0

    def to_dict(self) -> Dict[str, float]:
        return {
            "gamma": self.gamma, "C_sigma": self.C_sigma, "sigma_max": self.sigma_max,
            "C_G": self.C_G, "alpha": self.alpha, "C_h": self.C_h,
            "C_B": self.C_B, "p_B": self.p_B,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HypothesisConstants":
        known = {k: float(v) for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


# ================================================================================
# INITIAL PROFILES
# ================================================================================

INITIAL_KINDS = ("sine", "riemann", "bump", "random-fourier", "constant")


def _torus_offset(x: np.ndarray, center: float) -> np.ndarray:
    d = np.abs(x - center) % 1.0
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class InitialProfile:
    """
    Named deterministic initial datum u₀.

    sine:           amplitude·sin(2π·frequency·x₁) [· sin(2π·frequency·x₂)]
    riemann:        left on [position - width, position) in x₁, right elsewhere
    bump:           amplitude·exp(1 - 1/(1 - r²)) for r = |x - center|/radius < 1
    random-fourier: Σ_{k<=modes} k^(-decay)·(a_k cos 2πk·x₁ + b_k sin 2πk·x₁), seeded
    constant:       value
    """
    kind: str = "sine"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigValidationError("initial.kind", f"unknown profile '{self.kind}', expected one of {INITIAL_KINDS}")

    def _get(self, name: str, default: float) -> float:
        return float(self.params.get(name, default))

    def field(self, grid: TorusGrid) -> ScalarField:
        coords = grid.coordinates()
        x1 = coords[0]
        if self.kind == "sine":
            amplitude = self._get("amplitude", 1.0)
            frequency = self._get("frequency", 1.0)
            values = amplitude * np.sin(2.0 * np.pi * frequency * x1)
            if grid.dim == 2:
                values = values * np.sin(2.0 * np.pi * frequency * coords[1])
        elif self.kind == "riemann":
            left = self._get("left", 1.0)
            right = self._get("right", 0.0)
            position = self._get("position", 0.5)
            width = self._get("width", 0.5)
            start = position - width
            inside = ((x1 - start) % 1.0) < width
            values = np.where(inside, left, right)
        elif self.kind == "bump":
            amplitude = self._get("amplitude", 1.0)
            radius = self._get("radius", 0.25)
            center = self._get("center", 0.5)
            r2 = sum(_torus_offset(c, center) ** 2 for c in coords) / radius ** 2
            with np.errstate(divide="ignore", over="ignore"):
                values = np.where(r2 < 1.0, amplitude * np.exp(1.0 - 1.0 / (1.0 - np.minimum(r2, 1.0 - 1e-300))), 0.0)
        elif self.kind == "random-fourier":
            seed = int(self.params.get("seed", 0))
            modes = int(self.params.get("modes", 8))
            amplitude = self._get("amplitude", 1.0)
            decay = self._get("decay", 1.0)
            rng = np.random.default_rng(seed)
            values = np.zeros(grid.shape)
            for k in range(1, modes + 1):
                a, b = rng.standard_normal(2)
                phase = 2.0 * np.pi * k * x1
                if grid.dim == 2:
                    phase = phase + 2.0 * np.pi * int(rng.integers(0, k + 1)) * coords[1]
                values = values + k ** (-decay) * (a * np.cos(phase) + b * np.sin(phase))
            values = amplitude * values
        else:
            values = np.full(grid.shape, self._get("value", 0.0))
        return ScalarField(grid, values)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, **{k: self.params[k] for k in sorted(self.params)}}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InitialProfile":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigValidationError("initial", "expected a mapping with a 'kind' entry")
        return cls(kind=data["kind"], params={k: v for k, v in data.items() if k != "kind"})


# ================================================================================
# PROBLEM SPEC
# ================================================================================

@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """
    Immutable problem specification; safe to share across threads.

    `modes` is the default truncation K used when sampling noise paths.
    """
    flux: FluxModel
    diffusion: DiffusionModel
    noise: NoiseModel
    initial: InitialProfile
    constants: HypothesisConstants
    modes: int = NOISE_DEFAULTS['modes']
    key: Optional[str] = None

    def __post_init__(self):
        if self.flux.dim != self.diffusion.dim:
            raise DomainError(
                "dim", {"flux": self.flux.dim, "diffusion": self.diffusion.dim}, "flux and diffusion dimensions agree"
            )
        if self.dim not in (1, 2):
            raise UnsupportedConfigurationError(f"Dimension {self.dim} not supported", {"dim": self.dim})
        if self.modes < 0:
            raise DomainError("modes", self.modes, "K >= 0")

    @property
    def dim(self) -> int:
        return self.flux.dim

    # --- coefficient evaluation -------------------------------------------------

    def B(self, xi: Any) -> np.ndarray:
        return self.flux.value(xi)

    def b(self, xi: Any) -> np.ndarray:
        return self.flux.derivative(xi)

    def A(self, xi: Any) -> np.ndarray:
        return self.diffusion.value(xi)

    def A_bar(self, xi: Any) -> np.ndarray:
        return self.diffusion.antiderivative(xi)

    def sigma(self, xi: Any) -> np.ndarray:
        return self.diffusion.sigma(xi)

    def Sigma(self, xi: Any) -> np.ndarray:
        return self.diffusion.sigma_antiderivative(xi)

    def noise_coefficients(self, coords: Tuple[np.ndarray, ...], u: np.ndarray, modes: Optional[int] = None) -> np.ndarray:
        return self.noise.coefficients(self.modes if modes is None else modes, coords, u)

    def G2(self, coords: Tuple[np.ndarray, ...], u: np.ndarray, modes: Optional[int] = None) -> np.ndarray:
        return np.sum(self.noise_coefficients(coords, u, modes) ** 2, axis=0)

    def initial_field(self, grid: TorusGrid) -> ScalarField:
        if grid.dim != self.dim:
            raise DomainError("grid.dim", grid.dim, f"equal to problem dimension {self.dim}")
        return self.initial.field(grid)

    # --- derived specs ------------------------------------------------------------

    def with_flux(self, flux: FluxModel) -> "ProblemSpec":
        return replace(self, flux=flux)

    def with_diffusion(self, diffusion: DiffusionModel) -> "ProblemSpec":
        return replace(self, diffusion=diffusion)

    def with_noise(self, noise: NoiseModel) -> "ProblemSpec":
        return replace(self, noise=noise)

    def with_initial(self, initial: InitialProfile) -> "ProblemSpec":
        return replace(self, initial=initial)

    def deterministic(self) -> "ProblemSpec":
        return replace(self, noise=ZeroNoise(), modes=0)

    # --- serialization ------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "key": self.key,
            "flux": self.flux.to_dict(),
            "diffusion": self.diffusion.to_dict(),
            "noise": self.noise.to_dict(),
            "initial": self.initial.to_dict(),
            "constants": self.constants.to_dict(),
            "modes": self.modes,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProblemSpec":
        """
        Accepts either {"catalog": key, "dim": N, "modes": K, "options": {...}}
        or an inline to_dict() form.
        """
        if "catalog" in data:
            options = data.get("options") or {}
            if not isinstance(options, dict):
                raise ConfigValidationError("problem.options", "expected a mapping")
            return catalog_problem(
                data["catalog"],
                dim=int(data.get("dim", 1)),
                modes=int(data.get("modes", NOISE_DEFAULTS['modes'])),
                **options,
            )
        for required in ("flux", "diffusion", "noise", "initial"):
            if required not in data:
                raise ConfigValidationError(f"problem.{required}", "missing entry")
        return cls(
            flux=FluxModel.from_dict(data["flux"], "problem.flux"),
            diffusion=DiffusionModel.from_dict(data["diffusion"], "problem.diffusion"),
            noise=noise_from_dict(data["noise"], "problem.noise"),
            initial=InitialProfile.from_dict(data["initial"]),
            constants=HypothesisConstants.from_dict(data.get("constants", {})),
            modes=int(data.get("modes", NOISE_DEFAULTS['modes'])),
            key=data.get("key"),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProblemSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return id(self)


# ================================================================================
# CATALOG
# ================================================================================

def _direction(dim: int, velocity: float) -> Tuple[float, ...]:
    return (velocity,) * dim


def _identity(dim: int) -> np.ndarray:
    return np.eye(dim)


def _initial(options: Dict[str, Any], default: Dict[str, Any]) -> InitialProfile:
    return InitialProfile.from_dict(options.get("initial") or default)


CATALOG_KEYS = (
    "heat",
    "linear-transport",
    "burgers",
    "burgers-degenerate",
    "degenerate-multiplicative",
    "additive-heat",
    "harmonic-heat",
)

CATALOG_OPTIONS = frozenset(
    {"velocity", "a_max", "noise_amplitude", "noise_decay", "noise_scale", "noise_c", "initial"}
)


def catalog_problem(key: str, dim: int = 1, modes: int = NOISE_DEFAULTS['modes'], **options: Any) -> ProblemSpec:
    """
    Build a named catalog problem. Every catalog entry satisfies the audited
    hypotheses with the constants it declares.

    Options (all optional):
        velocity, a_max, noise_amplitude, noise_decay, noise_scale, noise_c, initial
    """
    options = dict(options)
    unknown = sorted(set(options) - CATALOG_OPTIONS)
    if unknown:
        raise ConfigValidationError("problem.options", f"unknown options {unknown} for '{key}'")
    dim = int(dim)
    modes = int(modes)
    zero_flux = FluxModel(Affine(0.0, 0.0), _direction(dim, 1.0))
    burgers = FluxModel(Quadratic(0.5), _direction(dim, 1.0))
    no_diffusion = DiffusionModel(Constant(0.0), _identity(dim))
    a_max = float(options.get("a_max", 1.0))
    degenerate = DiffusionModel(ClippedQuadratic(cap=a_max), _identity(dim))
    multiplicative = MultiplicativeNoise(
        amplitude=float(options.get("noise_amplitude", 0.5)),
        decay=float(options.get("noise_decay", 2.0)),
        scale=float(options.get("noise_scale", 1.0)),
    )
    degenerate_constants = dict(gamma=1.0, C_sigma=1.0, sigma_max=math.sqrt(a_max), C_B=1.0, p_B=2.0)

    if key == "heat":
        spec = ProblemSpec(
            flux=zero_flux,
            diffusion=DiffusionModel(Constant(1.0), _identity(dim)),
            noise=ZeroNoise(),
            initial=_initial(options, {"kind": "sine"}),
            constants=HypothesisConstants(gamma=1.0, C_sigma=1.0, sigma_max=1.0, C_B=1.0, p_B=1.0),
            modes=0,
            key=key,
        )
    elif key == "linear-transport":
        velocity = float(options.get("velocity", 1.0))
        spec = ProblemSpec(
            flux=FluxModel(Affine(1.0, 0.0), _direction(dim, velocity)),
            diffusion=no_diffusion,
            noise=ZeroNoise(),
            initial=_initial(options, {"kind": "sine"}),
            constants=HypothesisConstants(
                gamma=1.0, C_sigma=1.0, sigma_max=0.0, C_B=abs(velocity) * math.sqrt(dim), p_B=1.0
            ),
            modes=0,
            key=key,
        )
    elif key == "burgers":
        spec = ProblemSpec(
            flux=burgers,
            diffusion=no_diffusion,
            noise=ZeroNoise(),
            initial=_initial(options, {"kind": "riemann"}),
            constants=HypothesisConstants(gamma=1.0, C_sigma=1.0, sigma_max=0.0, C_B=math.sqrt(dim), p_B=2.0),
            modes=0,
            key=key,
        )
    elif key == "burgers-degenerate":
        spec = ProblemSpec(
            flux=burgers,
            diffusion=degenerate,
            noise=ZeroNoise(),
            initial=_initial(options, {"kind": "riemann"}),
            constants=HypothesisConstants(**{**degenerate_constants, "C_B": math.sqrt(dim)}),
            modes=0,
            key=key,
        )
    elif key == "degenerate-multiplicative":
        spec = ProblemSpec(
            flux=burgers,
            diffusion=degenerate,
            noise=multiplicative,
            initial=_initial(options, {"kind": "sine"}),
            constants=HypothesisConstants(
                **{**degenerate_constants, "C_B": math.sqrt(dim)},
                C_G=multiplicative.growth_constant(modes),
                alpha=1.0,
                C_h=multiplicative.modulus_constant(modes),
            ),
            modes=modes,
            key=key,
        )
    elif key == "additive-heat":
        additive = AdditiveNoise(
            amplitude=float(options.get("noise_amplitude", 1.0)),
            decay=float(options.get("noise_decay", 1.0)),
        )
        spec = ProblemSpec(
            flux=zero_flux,
            diffusion=DiffusionModel(Constant(1.0), _identity(dim)),
            noise=additive,
            initial=_initial(options, {"kind": "constant", "value": 0.0}),
            constants=HypothesisConstants(
                gamma=1.0, C_sigma=1.0, sigma_max=1.0, C_B=1.0, p_B=1.0,
                C_G=additive.growth_constant(modes), alpha=1.0, C_h=0.0,
            ),
            modes=modes,
            key=key,
        )
    elif key == "harmonic-heat":
        harmonic = HarmonicLinearNoise(c=float(options.get("noise_c", 0.5)))
        spec = ProblemSpec(
            flux=zero_flux,
            diffusion=DiffusionModel(Constant(1.0), _identity(dim)),
            noise=harmonic,
            initial=_initial(options, {"kind": "sine"}),
            constants=HypothesisConstants(
                gamma=1.0, C_sigma=1.0, sigma_max=1.0, C_B=1.0, p_B=1.0,
                C_G=harmonic.growth_constant(modes), alpha=1.0, C_h=harmonic.modulus_constant(modes),
            ),
            modes=modes,
            key=key,
        )
    else:
        raise ConfigValidationError("problem.catalog", f"unknown catalog key '{key}', expected one of {CATALOG_KEYS}")

    return spec
