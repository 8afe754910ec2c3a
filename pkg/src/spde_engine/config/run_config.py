"""
Run Configuration
=================
Immutable, validated description of one experiment.

A RunConfig is built from a mapping (parsed JSON/YAML) by
RunConfig.from_dict, which checks every section and raises
ConfigValidationError naming the offending field. to_dict() gives the
normalized form; from_dict(to_dict(cfg)) == cfg.

Sections:
    problem        catalog form {"catalog", "dim", "modes", "options"} or inline form
    grid           {"dim", "points"}
    time           {"dt", "T", "output_times", "record_every"}; dt omitted -> largest
                   stable dt dividing T
    regularization {"eta", "R", "tau", "tau_list", "scheme"}
    noise          {"modes", "seed"}
    ensemble       {"members", "threads"}
    experiment     report options (p, lam, s, kernel, test functions, velocity grid, ...)
    out_dir        output directory
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from spde_engine.analytics.hypotheses import effective_spec, regularity_exponent
from spde_engine.analytics.ito import DRIFT_FORMS, build_test_profile
from spde_engine.analytics.metrics.seminorms import KERNELS
from spde_engine.config.settings import (
    ENSEMBLE_DEFAULTS,
    KINETIC_DEFAULTS,
    NOISE_DEFAULTS,
    SEMINORM_DEFAULTS,
    SOLVER_DEFAULTS,
)
from spde_engine.core.solver import stability_bound
from spde_engine.models.grid import TorusGrid
from spde_engine.models.problem import InitialProfile, ProblemSpec
from spde_engine.models.regularization import RegularizationParams, Scheme
from spde_engine.utils.exceptions import ConfigValidationError, SpdeEngineError


# =========================
# SECTIONS
# =========================

@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    points: int = 128

    def build(self) -> TorusGrid:
        return TorusGrid(dim=self.dim, points=self.points)


@dataclass(frozen=True)
class TimeConfig:
    T: float = 0.1
    dt: Optional[float] = None
    output_times: Optional[Tuple[float, ...]] = None
    record_every: Optional[int] = None


@dataclass(frozen=True)
class RegularizationConfig:
    eta: float = 0.0
    R: Optional[float] = None
    tau: float = 0.0
    tau_list: Tuple[float, ...] = ()
    scheme: str = SOLVER_DEFAULTS['scheme']

    def taus(self) -> Tuple[float, ...]:
        return self.tau_list or (self.tau,)


@dataclass(frozen=True)
class NoiseConfig:
    modes: Optional[int] = None
    seed: int = NOISE_DEFAULTS['seed']


@dataclass(frozen=True)
class EnsembleConfig:
    members: int = ENSEMBLE_DEFAULTS['members']
    threads: int = ENSEMBLE_DEFAULTS['threads']


@dataclass(frozen=True)
class ExperimentConfig:
    """Report options; each subcommand reads the ones it needs."""
    p: float = 2.0
    lam: float = 0.5
    s: Optional[float] = None
    kernel: str = SEMINORM_DEFAULTS['kernel']
    corpus_size: int = 20
    state_range: float = SOLVER_DEFAULTS['state_range']
    initial_b: Optional[Dict[str, Any]] = None
    eps: Optional[float] = None
    tail_R: Optional[float] = None
    test_functions: Tuple[int, ...] = (0, 1, 2)
    xi_center: float = 0.0
    xi_width: float = 1.0
    velocity_points: int = KINETIC_DEFAULTS['velocity_points']
    velocity_range: Optional[Tuple[float, float]] = None
    deposition: str = KINETIC_DEFAULTS['deposition']
    phi: Dict[str, Any] = field(default_factory=lambda: {"type": "quadratic", "scale": 1.0})
    psi_wavevector: Tuple[int, ...] = (0,)
    drift: str = "discrete"
    ito_correction: bool = True
    audit_samples: int = 4096


_SECTIONS = {
    "grid": GridConfig,
    "time": TimeConfig,
    "regularization": RegularizationConfig,
    "noise": NoiseConfig,
    "ensemble": EnsembleConfig,
    "experiment": ExperimentConfig,
}

_TUPLE_FIELDS = {"output_times", "tau_list", "test_functions", "velocity_range", "psi_wavevector"}


def _section(name: str, cls, data: Any):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigValidationError(name, "expected a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigValidationError(f"{name}.{unknown[0]}", f"unknown field, expected one of {sorted(known)}")
    values = {}
    for key, value in data.items():
        if key in _TUPLE_FIELDS and value is not None:
            if not isinstance(value, (list, tuple)):
                raise ConfigValidationError(f"{name}.{key}", "expected a list")
            value = tuple(value)
        values[key] = value
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigValidationError(name, str(exc)) from exc


# =========================
# RUN CONFIG
# =========================

@dataclass(frozen=True)
class RunConfig:
    problem: Dict[str, Any] = field(default_factory=lambda: {"catalog": "heat"})
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    regularization: RegularizationConfig = field(default_factory=RegularizationConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    out_dir: Optional[str] = None

    # --- derived objects --------------------------------------------------------

    def problem_spec(self) -> ProblemSpec:
        try:
            spec = ProblemSpec.from_dict(self.problem)
        except ConfigValidationError:
            raise
        except SpdeEngineError as exc:
            raise ConfigValidationError("problem", exc.message) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigValidationError("problem", str(exc)) from exc
        if self.noise.modes is not None:
            spec = replace(spec, modes=int(self.noise.modes))
        return spec

    def build_grid(self) -> TorusGrid:
        try:
            return self.grid.build()
        except SpdeEngineError as exc:
            raise ConfigValidationError("grid", exc.message) from exc

    def params(self, tau: Optional[float] = None) -> RegularizationParams:
        reg = self.regularization
        try:
            return RegularizationParams(
                dt=float(self.time.dt),
                T=float(self.time.T),
                eta=float(reg.eta),
                R=math.inf if reg.R is None else float(reg.R),
                tau=float(reg.tau if tau is None else tau),
                scheme=Scheme(reg.scheme),
            )
        except SpdeEngineError as exc:
            raise ConfigValidationError(f"regularization.{exc.details.get('parameter', 'params')}", exc.message) from exc
        except (TypeError, ValueError) as exc:
            raise ConfigValidationError("regularization", str(exc)) from exc

    def param_list(self) -> List[RegularizationParams]:
        return [self.params(tau) for tau in self.regularization.taus()]

    def initial_b(self) -> Optional[InitialProfile]:
        if self.experiment.initial_b is None:
            return None
        return InitialProfile.from_dict(self.experiment.initial_b)

    # --- validation ---------------------------------------------------------------

    def validate(self) -> "RunConfig":
        """Check cross-section constraints; returns self."""
        spec = self.problem_spec()
        grid = self.build_grid()
        if spec.dim != grid.dim:
            raise ConfigValidationError("grid.dim", f"{grid.dim} differs from the problem dimension {spec.dim}")
        if self.time.dt is None:
            raise ConfigValidationError("time.dt", "missing")
        reg = self.regularization
        if reg.tau_list:
            if len(reg.tau_list) < 2:
                raise ConfigValidationError("regularization.tau_list", "at least two viscosities")
            if any(b > a for a, b in zip(reg.tau_list, reg.tau_list[1:])):
                raise ConfigValidationError("regularization.tau_list", "must be nonincreasing")
        exp = self.experiment
        for params in self.param_list():
            bound = stability_bound(effective_spec(spec, params), grid, exp.state_range)
            if params.dt > bound * (1.0 + 1e-12):
                raise ConfigValidationError(
                    "time.dt", f"dt={params.dt!r} exceeds the stability bound {bound:.6g} for tau={params.tau!r}"
                )
        if self.time.output_times is not None:
            params = self.params()
            for t in self.time.output_times:
                if not 0.0 <= t <= params.T * (1.0 + 1e-12):
                    raise ConfigValidationError("time.output_times", f"{t!r} outside [0, T]")
                try:
                    params.step_of(t)
                except SpdeEngineError as exc:
                    raise ConfigValidationError("time.output_times", exc.message) from exc
        if self.time.record_every is not None and self.time.record_every < 1:
            raise ConfigValidationError("time.record_every", "must be >= 1")
        if self.ensemble.members < 1:
            raise ConfigValidationError("ensemble.members", "must be >= 1")
        if self.ensemble.threads < 1:
            raise ConfigValidationError("ensemble.threads", "must be >= 1")
        if self.noise.modes is not None and self.noise.modes < 0:
            raise ConfigValidationError("noise.modes", "must be >= 0")
        if not 0.0 < exp.lam < 1.0:
            raise ConfigValidationError("experiment.lam", "must lie in (0, 1)")
        if exp.kernel not in KERNELS:
            raise ConfigValidationError("experiment.kernel", f"expected one of {sorted(KERNELS)}")
        if exp.p < 1:
            raise ConfigValidationError("experiment.p", "must be >= 1")
        if exp.s is not None:
            self._validate_s(spec, exp.s)
        if exp.velocity_range is not None:
            if len(exp.velocity_range) != 2:
                raise ConfigValidationError("experiment.velocity_range", "expected [xi_min, xi_max]")
            low, high = exp.velocity_range
            if not (low < -exp.state_range and exp.state_range <= high):
                raise ConfigValidationError(
                    "experiment.velocity_range",
                    f"[{low}, {high}] does not cover the state range ±{exp.state_range}",
                )
        if exp.deposition not in ("nearest", "exact"):
            raise ConfigValidationError("experiment.deposition", "expected 'nearest' or 'exact'")
        if exp.drift not in DRIFT_FORMS:
            raise ConfigValidationError("experiment.drift", f"expected one of {DRIFT_FORMS}")
        if exp.eps is not None and not exp.eps > 0.0:
            raise ConfigValidationError("experiment.eps", "must be positive")
        build_test_profile(exp.phi)
        if exp.initial_b is not None:
            self.initial_b()
        return self

    @staticmethod
    def _validate_s(spec: ProblemSpec, s: float) -> None:
        constants = spec.constants
        try:
            varsigma = regularity_exponent(constants.gamma, constants.alpha)
        except SpdeEngineError as exc:
            raise ConfigValidationError("experiment.s", f"regularity exponent undefined: {exc.message}") from exc
        if not 0.0 < s < varsigma:
            raise ConfigValidationError("experiment.s", f"s={s!r} must lie in (0, {varsigma:.6g})")

    def with_stable_dt(self) -> "RunConfig":
        """Fill a missing dt with the largest stable value T/n."""
        if self.time.dt is not None:
            return self
        spec = self.problem_spec()
        grid = self.build_grid()
        bound = math.inf
        for tau in self.regularization.taus():
            trial_time = replace(self.time, dt=self.time.T)
            params = replace(self, time=trial_time).params(tau)
            bound = min(bound, stability_bound(effective_spec(spec, params), grid, self.experiment.state_range))
        T = float(self.time.T)
        steps = 1 if math.isinf(bound) else max(1, math.ceil(T / bound))
        return replace(self, time=replace(self.time, dt=T / steps))

    # --- serialization ------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"problem": self.problem, "out_dir": self.out_dir}
        for name in _SECTIONS:
            section = asdict(getattr(self, name))
            data[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in section.items()}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], validate: bool = True) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigValidationError("<root>", "expected a mapping")
        known = set(_SECTIONS) | {"problem", "out_dir"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigValidationError(unknown[0], f"unknown section, expected one of {sorted(known)}")
        problem = data.get("problem", {"catalog": "heat"})
        if not isinstance(problem, dict):
            raise ConfigValidationError("problem", "expected a mapping")
        sections = {name: _section(name, section_cls, data.get(name)) for name, section_cls in _SECTIONS.items()}
        out_dir = data.get("out_dir")
        config = cls(problem=problem, out_dir=None if out_dir is None else str(out_dir), **sections)
        if validate:
            config = config.with_stable_dt().validate()
        return config
