"""
Hypothesis Audit and Derived Coefficients
=========================================
Sampling-based checks of the structural hypotheses on (B, A, σ, g_k), plus
the coefficient transformations of the approximation cascade.

Checks (each reports the worst observed ratio against its bound):
- flux-growth:     |b(ξ)| <= C_B (1 + |ξ|^(p_B - 1))
- sigma-holder:    ‖σ(ξ) − σ(ζ)‖ <= C_σ |ξ − ζ|^γ,  |ξ − ζ| < 1
- sigma-bounded:   ‖σ(ξ)‖ <= σ_max
- noise-growth:    Σ_k g_k(x, ξ)² <= C_G (1 + ξ²)
- noise-modulus:   Σ_k |g_k(x, ξ) − g_k(y, ζ)|² <= C_h (|x − y|² + |ξ − ζ|^(1+α))
- diffusion-psd:   eigenvalues of A(ξ) >= 0
- sigma-square:    σ(ξ)σ(ξ) = A(ξ)

Matrix norms are spectral. Sample points come from a scrambled Sobol
sequence, so a report is deterministic given (samples, seed).
"""

from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import qmc

from spde_engine.config.settings import AUDIT_DEFAULTS, QUADRATURE_CONFIG
from spde_engine.config.thresholds import MACHINE_PRECISION
from spde_engine.models.coefficients import Mollified, MollifiedNoise, Truncated
from spde_engine.models.problem import ProblemSpec
from spde_engine.models.regularization import RegularizationParams, Scheme
from spde_engine.models.results import AuditReport, HypothesisCheck
from spde_engine.utils.exceptions import CoefficientEvaluationError, DomainError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)


# ================================================================================
# SAMPLING HELPERS
# ================================================================================

def _sobol(dim: int, samples: int, seed: int) -> np.ndarray:
    """First `samples` points of a scrambled Sobol sequence in [0,1)^dim."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    power = max(0, math.ceil(math.log2(max(samples, 1))))
    return sampler.random_base2(power)[:samples]


def _require_finite(name: str, xi: np.ndarray, values: np.ndarray) -> None:
    """Raise on the first sample whose coefficient values are not all finite."""
    flat = np.asarray(values, dtype=float).reshape(len(xi), -1)
    bad_rows = ~np.all(np.isfinite(flat), axis=1)
    if bad_rows.any():
        i = int(np.flatnonzero(bad_rows)[0])
        row = flat[i]
        raise CoefficientEvaluationError(name, float(xi[i]), float(row[~np.isfinite(row)][0]))


def _spectral_norm(matrices: np.ndarray) -> np.ndarray:
    return np.linalg.norm(matrices, ord=2, axis=(-2, -1))


def _ratio(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """lhs/rhs with 0/0 = 0 and x/0 = inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, 0.0))
    return ratio


def _verdict(name: str, ratio: np.ndarray, bound: str, witness_fn, constant: Optional[float] = None) -> HypothesisCheck:
    slack = AUDIT_DEFAULTS['relative_slack']
    index = int(np.argmax(ratio)) if ratio.size else 0
    worst = float(ratio[index]) if ratio.size else 0.0
    observed = None
    if constant is not None:
        observed = worst * constant if math.isfinite(worst) else math.inf
    return HypothesisCheck(
        name=name,
        passed=bool(worst <= 1.0 + slack),
        max_ratio=worst,
        bound=bound,
        witness=witness_fn(index) if ratio.size else {},
        observed_constant=observed,
    )


def _torus_distance_sq(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|x − y|² in the wrap-around metric; arrays of shape (S, N)."""
    d = np.abs(x - y) % 1.0
    d = np.minimum(d, 1.0 - d)
    return np.sum(d * d, axis=-1)


# ================================================================================
# AUDIT
# ================================================================================

def audit_hypotheses(spec: ProblemSpec, samples: int = AUDIT_DEFAULTS['samples'], seed: int = 0) -> AuditReport:
    """
    Check every structural hypothesis of `spec` on `samples` quasi-random points.

    Raises:
        DomainError: samples < 1
        CoefficientEvaluationError: a coefficient is not finite at a sample
    """
    if samples < 1:
        raise DomainError("samples", samples, "samples >= 1")
    box = AUDIT_DEFAULTS['xi_box']
    gap = AUDIT_DEFAULTS['holder_max_gap']
    c = spec.constants
    dim = spec.dim
    modes = spec.modes
    checks: List[HypothesisCheck] = []

    # --- flux growth ---------------------------------------------------------------
    xi = box * (2.0 * _sobol(1, samples, seed)[:, 0] - 1.0)
    speed = spec.flux.speed(xi)
    _require_finite("b", xi, speed)
    shape = 1.0 + np.abs(xi) ** (c.p_B - 1.0)
    checks.append(_verdict(
        "flux-growth", _ratio(speed, c.C_B * shape), "|b(xi)| <= C_B (1 + |xi|^(p_B-1))",
        lambda i: {"xi": float(xi[i]), "speed": float(speed[i])}, c.C_B,
    ))

    # --- sigma Holder and boundedness --------------------------------------------
    pts = _sobol(2, samples, seed + 1)
    xi = box * (2.0 * pts[:, 0] - 1.0)
    delta = gap * (2.0 * pts[:, 1] - 1.0)
    zeta = xi + delta
    delta = zeta - xi
    sig_xi = spec.sigma(xi)
    sig_zeta = spec.sigma(zeta)
    _require_finite("sigma", xi, sig_xi)
    _require_finite("sigma", zeta, sig_zeta)
    jump = _spectral_norm(sig_xi - sig_zeta)
    checks.append(_verdict(
        "sigma-holder", _ratio(jump, c.C_sigma * np.abs(delta) ** c.gamma),
        "|sigma(xi)-sigma(zeta)| <= C_sigma |xi-zeta|^gamma",
        lambda i: {"xi": float(xi[i]), "zeta": float(zeta[i]), "jump": float(jump[i])}, c.C_sigma,
    ))
    size = _spectral_norm(sig_xi)
    checks.append(_verdict(
        "sigma-bounded", _ratio(size, np.full_like(size, c.sigma_max)), "|sigma(xi)| <= sigma_max",
        lambda i: {"xi": float(xi[i]), "norm": float(size[i])}, c.sigma_max,
    ))

    # --- noise growth ----------------------------------------------------------------
    pts = _sobol(dim + 1, samples, seed + 2)
    x = pts[:, :dim]
    xi = box * (2.0 * pts[:, dim] - 1.0)
    coords = tuple(x[:, a] for a in range(dim))
    g = spec.noise_coefficients(coords, xi, modes)
    _require_finite("g_k", xi, g.T)
    G2 = np.sum(g * g, axis=0)
    checks.append(_verdict(
        "noise-growth", _ratio(G2, c.C_G * (1.0 + xi * xi)), "sum_k g_k(x,xi)^2 <= C_G (1 + xi^2)",
        lambda i: {"x": x[i].tolist(), "xi": float(xi[i]), "G2": float(G2[i])}, c.C_G,
    ))

    # --- noise modulus ---------------------------------------------------------------
    pts = _sobol(2 * dim + 2, samples, seed + 3)
    x = pts[:, :dim]
    y = pts[:, dim:2 * dim]
    xi = box * (2.0 * pts[:, 2 * dim] - 1.0)
    delta = gap * (2.0 * pts[:, 2 * dim + 1] - 1.0)
    zeta = xi + delta
    delta = zeta - xi
    g_x = spec.noise_coefficients(tuple(x[:, a] for a in range(dim)), xi, modes)
    g_y = spec.noise_coefficients(tuple(y[:, a] for a in range(dim)), zeta, modes)
    _require_finite("g_k", xi, g_x.T)
    _require_finite("g_k", zeta, g_y.T)
    lhs = np.sum((g_x - g_y) ** 2, axis=0)
    rhs = _torus_distance_sq(x, y) + np.abs(delta) ** (1.0 + c.alpha)
    checks.append(_verdict(
        "noise-modulus", _ratio(lhs, c.C_h * rhs),
        "sum_k |g_k(x,xi)-g_k(y,zeta)|^2 <= C_h (|x-y|^2 + |xi-zeta|^(1+alpha))",
        lambda i: {"x": x[i].tolist(), "y": y[i].tolist(), "xi": float(xi[i]), "zeta": float(zeta[i])}, c.C_h,
    ))

    # --- PSD and sigma^2 = A ------------------------------------------------------------
    xi = box * (2.0 * _sobol(1, samples, seed + 4)[:, 0] - 1.0)
    A = spec.A(xi)
    _require_finite("A", xi, A)
    eigenvalues = np.linalg.eigvalsh(A)
    lowest = eigenvalues[:, 0]
    scale = np.maximum(1.0, np.abs(eigenvalues).max(axis=1))
    checks.append(_verdict(
        "diffusion-psd", np.maximum(-lowest, 0.0) / (MACHINE_PRECISION.value * scale),
        "min eigenvalue of A(xi) >= 0",
        lambda i: {"xi": float(xi[i]), "eigenvalue": float(lowest[i])},
    ))
    sig = spec.sigma(xi)
    defect = _spectral_norm(sig @ sig - A)
    tolerance = QUADRATURE_CONFIG['relative_tolerance'] * np.maximum(1.0, _spectral_norm(A))
    checks.append(_verdict(
        "sigma-square", defect / tolerance, "sigma(xi) sigma(xi) = A(xi)",
        lambda i: {"xi": float(xi[i]), "defect": float(defect[i])},
    ))

    report = AuditReport(checks=checks, samples=int(samples), seed=int(seed))
    if report.passed:
        logger.info(f"Audit passed ({len(checks)} checks, {samples} samples)")
    else:
        logger.warning(f"Audit failed: {report.failures()}")
    return report


# ================================================================================
# REGULARITY EXPONENT
# ================================================================================

def regularity_exponent(gamma: float, alpha: float) -> float:
    """ς = min{(2γ − 1)/(γ + 1), 2α/(α + 1)} for γ ∈ (1/2, 1], α ∈ (0, 1]."""
    if not 0.5 < gamma <= 1.0:
        raise DomainError("gamma", gamma, "1/2 < gamma <= 1")
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha", alpha, "0 < alpha <= 1")
    return min((2.0 * gamma - 1.0) / (gamma + 1.0), 2.0 * alpha / (alpha + 1.0))


# ================================================================================
# CASCADE COEFFICIENTS
# ================================================================================

def truncate_flux(spec: ProblemSpec, R: float) -> ProblemSpec:
    """
    Replace B by its C¹ linear continuation outside [−R, R].

    Affine fluxes are returned unchanged.
    """
    if not R > 0:
        raise DomainError("R", R, "R > 0")
    if math.isinf(R) or spec.flux.profile.is_affine:
        return spec
    return spec.with_flux(spec.flux.with_profile(Truncated(spec.flux.profile, R)))


def mollify_coefficients(spec: ProblemSpec, eta: float) -> ProblemSpec:
    """
    Convolve B, A and the state dependence of g_k in ξ with ρ_η.

    Affine and constant profiles, and state-independent noise, are kept as
    they are since the symmetric mollifier reproduces them.
    """
    if not 0.0 < eta < 1.0:
        raise DomainError("eta", eta, "0 < eta < 1")
    flux = spec.flux
    if not flux.profile.is_affine:
        flux = flux.with_profile(Mollified(flux.profile, eta))
    diffusion = spec.diffusion
    if not diffusion.profile.is_constant:
        diffusion = diffusion.with_profile(Mollified(diffusion.profile, eta))
    noise = spec.noise
    constants = spec.constants
    if noise.kind not in ("zero", "additive"):
        noise = MollifiedNoise(noise, eta)
        constants = replace(constants, C_G=2.0 * constants.C_G)
    return replace(spec, flux=flux, diffusion=diffusion, noise=noise, constants=constants)


def effective_spec(spec: ProblemSpec, params: RegularizationParams) -> ProblemSpec:
    """
    Coefficients a scheme actually uses: B truncated at R when R is
    finite, then (eta-scheme only) B, A and g_k mollified at scale η.
    """
    result = spec
    if math.isfinite(params.R):
        result = truncate_flux(result, params.R)
    if params.scheme is Scheme.ETA:
        result = mollify_coefficients(result, params.eta)
    return result


# ================================================================================
# PHI_N FAMILY
# ================================================================================

def _check_phi_n(n: Any, p: Any) -> None:
    if n < 1:
        raise DomainError("n", n, "n >= 1")
    if p < 2:
        raise DomainError("p", p, "p >= 2")


def phi_n_derivatives(xi: Any, n: float, p: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (φ_n, φ′_n, φ″_n) at xi, vectorized.

    φ_n(ξ) = |ξ|^p on |ξ| <= n, and the quadratic continuation
    n^(p-2)[p(p-1)/2 ξ² − p(p-2) n|ξ| + (p-1)(p-2)/2 n²] outside, C² at |ξ| = n.
    """
    _check_phi_n(n, p)
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    s = np.sign(xi)
    inside = a <= n
    scale = n ** (p - 2.0)
    value_in = a ** p
    first_in = p * a ** (p - 1.0) * s
    second_in = p * (p - 1.0) * a ** (p - 2.0)
    value_out = scale * (0.5 * p * (p - 1.0) * xi * xi - p * (p - 2.0) * n * a + 0.5 * (p - 1.0) * (p - 2.0) * n * n)
    first_out = scale * (p * (p - 1.0) * xi - p * (p - 2.0) * n * s)
    second_out = np.full_like(a, scale * p * (p - 1.0))
    return (
        np.where(inside, value_in, value_out),
        np.where(inside, first_in, first_out),
        np.where(inside, second_in, second_out),
    )


def eval_phi_n(xi: Any, n: float, p: float) -> Any:
    value = phi_n_derivatives(xi, n, p)[0]
    return float(value) if value.ndim == 0 else value


def phi_n_exact(xi: Fraction, n: int, p: int) -> Tuple[Fraction, Fraction, Fraction]:
    """(φ_n, φ′_n, φ″_n) in rational arithmetic; integer n and p only."""
    if int(p) != p or int(n) != n:
        raise DomainError("phi_n_exact", {"n": n, "p": p}, "integer n and p")
    n, p = int(n), int(p)
    _check_phi_n(n, p)
    xi = Fraction(xi)
    a = abs(xi)
    s = 1 if xi > 0 else (-1 if xi < 0 else 0)
    if a <= n:
        return a ** p, p * a ** (p - 1) * s, Fraction(p * (p - 1)) * a ** (p - 2)
    scale = Fraction(n) ** (p - 2)
    value = scale * (Fraction(p * (p - 1), 2) * xi * xi - p * (p - 2) * n * a + Fraction((p - 1) * (p - 2), 2) * n * n)
    first = scale * (p * (p - 1) * xi - p * (p - 2) * n * s)
    second = scale * p * (p - 1)
    return value, first, second


def phi_n_inequality_gaps(xi: Fraction, n: int, p: int) -> Dict[str, Fraction]:
    """
    Right side minus left side of the five φ_n inequalities, exactly:

        |ξ φ′| <= p φ,  |φ′| <= p(1 + φ),  |φ′| <= |ξ| φ″,
        ξ² φ″ <= p(p−1) φ,  φ″ <= p(p−1)(1 + φ)
    """
    value, first, second = phi_n_exact(xi, n, p)
    xi = Fraction(xi)
    return {
        "xi_first": p * value - abs(xi * first),
        "first": p * (1 + value) - abs(first),
        "first_second": abs(xi) * second - abs(first),
        "xi2_second": p * (p - 1) * value - xi * xi * second,
        "second": p * (p - 1) * (1 + value) - second,
    }
