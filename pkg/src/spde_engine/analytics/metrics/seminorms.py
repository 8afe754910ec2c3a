"""
Fractional Seminorms
====================
Gagliardo-type seminorm and its mollifier-based counterpart on 𝕋^N:

    p^λ(u)   = ∫∫ |u(x) − u(y)| / |x − y|^(N+λ) dx dy
    p^λ_ρ(u) = sup_{0<ε<2D_N} ε^(-λ) ∫∫ |u(x) − u(y)| ρ_ε(x − y) dx dy

with |x − y| the wrap-around distance and D_N = √N.

Grid fields are read as piecewise constant on cells. Everything reduces to
the offset table S_s = Σ_i |u_i − u_{i+s}|:

- N = 1: all offsets, with exact cell-pair weights W_d of |x − y|^(-1-λ),
  so p^λ is exact for piecewise-constant data
- N = 2: offsets with |s|_∞ <= 4 exact (weights by 2-d quadrature), the far
  field sampled by Chebyshev-radius strata with a reported standard error
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from spde_engine.config.settings import SEMINORM_DEFAULTS
from spde_engine.models.grid import ScalarField
from spde_engine.models.results import SeminormFit, SeminormReport
from spde_engine.utils.exceptions import DomainError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)

NEAR_FIELD = 4


# =========================
# KERNELS
# =========================

KERNELS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "bump": lambda r: np.where(r < 1.0, np.exp(-1.0 / (1.0 - np.minimum(r, 1.0 - 1e-15) ** 2)), 0.0),
    "hat": lambda r: np.clip(1.0 - r, 0.0, None),
    "indicator": lambda r: np.where(r < 1.0, 1.0, 0.0),
}


@lru_cache(maxsize=16)
def kernel_mass(kernel: str, dim: int) -> float:
    """∫_{ℝ^N} ρ(|z|) dz, for normalizing ρ to unit mass."""
    profile = KERNELS[kernel]
    if dim == 1:
        return 2.0 * integrate.quad(lambda r: float(profile(np.asarray(r))), 0.0, 1.0)[0]
    return 2.0 * math.pi * integrate.quad(lambda r: float(profile(np.asarray(r))) * r, 0.0, 1.0)[0]


def rho_eps(distance: np.ndarray, eps: float, kernel: str, dim: int) -> np.ndarray:
    """ρ_ε(z) = ε^(-N) ρ(|z|/ε), ρ of unit mass on ℝ^N."""
    if kernel not in KERNELS:
        raise DomainError("kernel", kernel, f"one of {sorted(KERNELS)}")
    return KERNELS[kernel](np.asarray(distance) / eps) / (kernel_mass(kernel, dim) * eps ** dim)


# =========================
# OFFSET TABLE
# =========================

@dataclass(frozen=True)
class OffsetTable:
    """
    Sampled or exhaustive offsets with their difference sums.

    distance: wrap-around |s|·h per entry
    sums: S_s = Σ_i |u_i − u_{i+s}|
    multiplicity: how many offsets each entry stands for
    stratum: stratum id (−1 for exact entries)
    """
    dim: int
    points: int
    offsets: np.ndarray
    distance: np.ndarray
    sums: np.ndarray
    multiplicity: np.ndarray
    stratum: np.ndarray


def _minimal_image(index: np.ndarray, points: int) -> np.ndarray:
    """Representative of index mod M in (−M/2, M/2]."""
    s = np.mod(index, points)
    return np.where(s > points // 2, s - points, s)


def _difference_sum(values: np.ndarray, offset: Sequence[int]) -> float:
    shifted = np.roll(values, tuple(-int(o) for o in offset), axis=tuple(range(values.ndim)))
    return float(np.sum(np.abs(values - shifted)))


def offset_table(u: ScalarField, samples: Optional[int] = None, seed: Optional[int] = None) -> OffsetTable:
    grid = u.grid
    M = grid.points
    values = u.values
    if grid.dim == 1:
        d = np.arange(1, M)
        sums = np.array([_difference_sum(values, (k,)) for k in d])
        return OffsetTable(
            dim=1, points=M, offsets=d[:, None], distance=grid.h * np.abs(_minimal_image(d, M)),
            sums=sums, multiplicity=np.ones(d.size), stratum=np.full(d.size, -1),
        )
    if M < 2 * NEAR_FIELD + 2:
        raise DomainError("points", M, f">= {2 * NEAR_FIELD + 2} for 2-d seminorms")
    samples = samples or SEMINORM_DEFAULTS['pair_samples_2d']
    rng = np.random.default_rng(SEMINORM_DEFAULTS['sampling_seed'] if seed is None else seed)
    axis = _minimal_image(np.arange(M), M)
    s1, s2 = np.meshgrid(axis, axis, indexing="ij")
    s1, s2 = s1.ravel(), s2.ravel()
    radius = np.maximum(np.abs(s1), np.abs(s2))
    rows, strata, mult = [], [], []
    near = (radius >= 1) & (radius <= NEAR_FIELD)
    for a, b in zip(s1[near], s2[near]):
        rows.append((a, b))
        strata.append(-1)
        mult.append(1.0)
    shells = np.arange(NEAR_FIELD + 1, int(radius.max()) + 1)
    per_shell = max(2, samples // max(1, shells.size))
    for r in shells:
        members = np.flatnonzero(radius == r)
        if members.size <= per_shell:
            chosen, weight, tag = members, 1.0, -1
        else:
            chosen = rng.choice(members, size=per_shell, replace=False)
            weight, tag = members.size / per_shell, int(r)
        for m in chosen:
            rows.append((s1[m], s2[m]))
            strata.append(tag)
            mult.append(weight)
    offsets = np.array(rows, dtype=np.int64)
    sums = np.array([_difference_sum(values, tuple(o)) for o in offsets])
    return OffsetTable(
        dim=2, points=M, offsets=offsets, distance=grid.h * np.sqrt(np.sum(offsets.astype(float) ** 2, axis=1)),
        sums=sums, multiplicity=np.array(mult), stratum=np.array(strata),
    )


# =========================
# CELL-PAIR WEIGHTS
# =========================

def _weights_1d(points: int, lam: float) -> np.ndarray:
    """
    W_d = ∫_{cell i}∫_{cell i+d} |x − y|^(-1-λ) dx dy for d = 1..M−1.

    With F(r) = r^(1-λ)/(−λ(1−λ)), F″(r) = r^(-1-λ):
    W_d = F((d+1)h) − 2F(dh) + F((d−1)h) away from the antipode, and
    2(hF′(dh) − F(dh) + F((d−1)h)) at d = M/2.
    """
    h = 1.0 / points
    F = lambda r: r ** (1.0 - lam) / (-lam * (1.0 - lam))
    dF = lambda r: r ** (-lam) / (-lam)
    weights = np.zeros(points)
    for d in range(1, points // 2 + 1):
        if 2 * (d + 1) <= points:
            w = F((d + 1) * h) - 2.0 * F(d * h) + F((d - 1) * h)
        elif 2 * d == points:
            w = 2.0 * (h * dF(d * h) - F(d * h) + F((d - 1) * h))
        else:
            def integrand(s, d=d):
                r = d * h + s
                return (h - abs(s)) * min(r, 1.0 - r) ** (-1.0 - lam)
            w = integrate.quad(integrand, -h, h, points=[0.5 - d * h], epsabs=0.0, epsrel=1e-12, limit=200)[0]
        weights[d] = w
        weights[points - d] = w
    return weights[1:]


@lru_cache(maxsize=512)
def _near_weight_unit(s1: int, s2: int, lam: float) -> float:
    """V_s = ∫∫_{[-1,1]²} (1−|a|)(1−|b|) |s + (a, b)|^(-2-λ) da db."""
    def integrand(b, a):
        r = math.hypot(s1 + a, s2 + b)
        return (1.0 - abs(a)) * (1.0 - abs(b)) * r ** (-2.0 - lam) if r > 0 else 0.0
    pieces = 0.0
    for a_lo, a_hi in ((-1.0, 0.0), (0.0, 1.0)):
        for b_lo, b_hi in ((-1.0, 0.0), (0.0, 1.0)):
            pieces += integrate.dblquad(integrand, a_lo, a_hi, b_lo, b_hi, epsabs=1e-13, epsrel=1e-10)[0]
    return pieces


def _pair_weights(table: OffsetTable, lam: float) -> np.ndarray:
    h = 1.0 / table.points
    if table.dim == 1:
        return _weights_1d(table.points, lam)
    weights = np.empty(table.sums.size)
    for k, (a, b) in enumerate(table.offsets):
        if max(abs(a), abs(b)) <= NEAR_FIELD:
            weights[k] = h ** (2.0 - lam) * _near_weight_unit(int(a), int(b), lam)
        else:
            weights[k] = h ** (2.0 - lam) * math.hypot(a, b) ** (-2.0 - lam)
    return weights


def _check_lambda(lam: float) -> None:
    if not 0.0 < lam < 1.0:
        raise DomainError("lambda", lam, "0 < lambda < 1")


def _stratified_sum(table: OffsetTable, terms: np.ndarray) -> Tuple[float, float]:
    """Σ multiplicity·term with the standard error contributed by sampled strata."""
    total = float(np.sum(table.multiplicity * terms))
    variance = 0.0
    for tag in np.unique(table.stratum[table.stratum >= 0]):
        mask = table.stratum == tag
        n_stratum = table.multiplicity[mask][0] * mask.sum()
        sample = terms[mask]
        variance += n_stratum ** 2 * np.var(sample, ddof=1) / sample.size
    return total, math.sqrt(variance)


# =========================
# SEMINORMS
# =========================

def seminorm_p_estimate(u: ScalarField, lam: float, table: Optional[OffsetTable] = None) -> Tuple[float, float]:
    """(p^λ(u), standard error); the error is 0 in N = 1."""
    _check_lambda(lam)
    table = table or offset_table(u)
    return _stratified_sum(table, _pair_weights(table, lam) * table.sums)


def seminorm_p(u: ScalarField, lam: float) -> float:
    return seminorm_p_estimate(u, lam)[0]


def eps_grid(u: ScalarField, points: Optional[int] = None) -> np.ndarray:
    """Geometric ε-grid from 2h to 2D_N."""
    return np.geomspace(2.0 * u.grid.h, 2.0 * math.sqrt(u.grid.dim), points or SEMINORM_DEFAULTS['eps_points'])


def seminorm_rho(
    u: ScalarField,
    lam: float,
    kernel: str = SEMINORM_DEFAULTS['kernel'],
    table: Optional[OffsetTable] = None,
) -> SeminormReport:
    """p^λ_ρ(u) as the max of ε^(-λ) Σ_pairs h^(2N) |u_i − u_j| ρ_ε(x_i − x_j) over the ε-grid."""
    _check_lambda(lam)
    table = table or offset_table(u)
    cell_pair = u.grid.cell_volume ** 2
    grid_eps = eps_grid(u)
    values = np.array([
        eps ** (-lam) * float(np.sum(table.multiplicity * table.sums * cell_pair * rho_eps(table.distance, eps, kernel, table.dim)))
        for eps in grid_eps
    ])
    p_value, p_error = _stratified_sum(table, _pair_weights(table, lam) * table.sums)
    return SeminormReport(
        lam=float(lam),
        p_value=p_value,
        rho_value=float(np.max(values)),
        eps_grid=grid_eps,
        rho_values=values,
        kernel=kernel,
        p_standard_error=p_error,
    )


def fit_seminorm_constants(
    fields: Sequence[ScalarField],
    lam: float,
    s: float,
    kernel: str = SEMINORM_DEFAULTS['kernel'],
) -> SeminormFit:
    """
    Smallest constants making p^λ_ρ <= C₁ p^λ and p^s <= C₂/(λ − s) p^λ_ρ
    hold on every field of the corpus. Constant fields are skipped.
    """
    _check_lambda(lam)
    if not 0.0 < s < lam:
        raise DomainError("s", s, f"0 < s < lambda={lam}")
    rho_over_p, s_over_rho = [], []
    for u in fields:
        table = offset_table(u)
        report = seminorm_rho(u, lam, kernel, table=table)
        if report.p_value <= 0.0 or report.rho_value <= 0.0:
            continue
        p_s = seminorm_p_estimate(u, s, table=table)[0]
        rho_over_p.append(report.rho_value / report.p_value)
        s_over_rho.append((lam - s) * p_s / report.rho_value)
    if not rho_over_p:
        raise DomainError("fields", len(fields), "at least one non-constant field")
    fit = SeminormFit(
        lam=float(lam),
        s=float(s),
        rho_over_p=float(max(rho_over_p)),
        s_over_rho=float(max(s_over_rho)),
        corpus_size=len(rho_over_p),
        ratios_rho_over_p=rho_over_p,
        ratios_s_over_rho=s_over_rho,
    )
    logger.debug(f"Seminorm constants over {fit.corpus_size} fields: {fit.rho_over_p:.4g}, {fit.s_over_rho:.4g}")
    return fit
