"""
Command Line Interface
======================
spde-lab <subcommand> --config PATH [--out DIR] [--threads N] [--reproducible] [--seed S]

Subcommands:
    run            one trajectory (member 0): snapshots and norms per time
    cascade        ensemble-averaged vanishing-viscosity distances
    contraction    L¹ contraction ratio between two initial data
    energy         τ-uniform L^p energy estimate
    regularity     τ-uniform fractional seminorm estimate
    kinetic-check  weak kinetic residuals and kinetic measures
    ito-check      Itô-formula defect with and without the correction term
    audit          structural hypothesis audit of the problem

Exit codes: 0 success (a failed verdict is still a successful run),
2 invalid configuration, 3 blow-up, 1 any other library error. Errors are
written as JSON to stderr and to <out>/error.json.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from spde_engine.analytics.hypotheses import audit_hypotheses
from spde_engine.analytics.ito import build_test_profile
from spde_engine.config.loader import (
    load_run_config,
    resolve_config_path,
    resolve_out_dir,
    resolve_threads,
)
from spde_engine.config.run_config import RunConfig
from spde_engine.config.settings import OUTPUT_DEFAULTS
from spde_engine.core import diagnostics_runner as diagnostics
from spde_engine.core.ensemble_runner import member_path
from spde_engine.core.solver import mollify_initial, solve
from spde_engine.data.run_store import canonical_json
from spde_engine.models.grid import ScalarField, TorusGrid
from spde_engine.models.problem import ProblemSpec
from spde_engine.models.test_functions import SpatialWeight, TrigonometricMode
from spde_engine.reporting import console
from spde_engine.reporting.export import (
    build_metadata,
    export_measures,
    export_report,
    export_trajectory,
    write_csv,
    write_error,
)
from spde_engine.utils.exceptions import ConfigValidationError, SpdeEngineError
from spde_engine.utils.logger import get_logger

logger = get_logger(__name__)

COMMANDS = ("run", "cascade", "contraction", "energy", "regularity", "kinetic-check", "ito-check", "audit")


# ================================================================================
# CONTEXT
# ================================================================================

class Context:
    """Resolved configuration shared by the subcommand handlers."""

    def __init__(self, config: RunConfig, out_dir: Path, threads: int, reproducible: bool, command: str):
        self.config = config
        self.out_dir = out_dir
        self.threads = threads
        self.reproducible = reproducible
        self.command = command
        self.spec: ProblemSpec = config.problem_spec()
        self.grid: TorusGrid = config.build_grid()

    @property
    def seed(self) -> int:
        return self.config.noise.seed

    @property
    def members(self) -> int:
        return self.config.ensemble.members

    def metadata(self, **extra: Any) -> Dict[str, Any]:
        return build_metadata(self.config, self.command, self.reproducible, extra or None)

    def initial(self) -> ScalarField:
        u0 = self.spec.initial_field(self.grid)
        eps = self.config.experiment.eps
        return u0 if eps is None else mollify_initial(u0, eps)

    def second_initial(self) -> ScalarField:
        profile = self.config.initial_b()
        if profile is None:
            raise ConfigValidationError("experiment.initial_b", "contraction needs a second initial profile")
        u0 = profile.field(self.grid)
        eps = self.config.experiment.eps
        return u0 if eps is None else mollify_initial(u0, eps)


# ================================================================================
# HANDLERS
# ================================================================================

def _run(ctx: Context) -> List[Path]:
    config = ctx.config
    params = config.params()
    path = member_path(ctx.seed, 0, params, 0 if ctx.spec.noise.is_zero else ctx.spec.modes)
    traj = solve(
        ctx.spec,
        ctx.grid,
        params,
        path,
        output_times=config.time.output_times,
        u0=ctx.initial(),
        record_every=config.time.record_every,
    )
    metadata = ctx.metadata()
    files = export_trajectory(traj, ctx.out_dir, metadata)
    axes = tuple(range(1, traj.snapshots.ndim))
    volume = ctx.grid.cell_volume
    norms = pd.DataFrame(
        {
            "time": traj.times,
            "step": traj.step_indices,
            "mass": np.sum(traj.snapshots, axis=axes) * volume,
            "l1": np.sum(np.abs(traj.snapshots), axis=axes) * volume,
            "l2": np.sqrt(np.sum(traj.snapshots ** 2, axis=axes) * volume),
            "max_abs": np.max(np.abs(traj.snapshots), axis=axes),
        }
    )
    files.append(write_csv(norms, ctx.out_dir / "norms.csv"))
    print(norms.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    return files


def _cascade(ctx: Context) -> List[Path]:
    config = ctx.config
    taus = config.regularization.taus()
    if len(taus) < 2:
        raise ConfigValidationError("regularization.tau_list", "cascade needs at least two viscosities")
    reg = config.regularization
    report = diagnostics.cascade_report(
        spec=ctx.spec,
        grid=ctx.grid,
        tau_list=taus,
        dt=float(config.time.dt),
        T=float(config.time.T),
        R=math.inf if reg.R is None else float(reg.R),
        members=ctx.members,
        seed=ctx.seed,
        u0=ctx.initial(),
        threads=ctx.threads,
        record_every=config.time.record_every,
    )
    console.print_ensemble_report(report)
    return export_report(report, ctx.out_dir, ctx.metadata())


def _contraction(ctx: Context) -> List[Path]:
    report = diagnostics.contraction_report(
        spec=ctx.spec,
        grid=ctx.grid,
        params=ctx.config.params(),
        u0_a=ctx.initial(),
        u0_b=ctx.second_initial(),
        members=ctx.members,
        seed=ctx.seed,
        output_times=ctx.config.time.output_times,
        threads=ctx.threads,
    )
    console.print_ensemble_report(report)
    return export_report(report, ctx.out_dir, ctx.metadata())


def _energy(ctx: Context) -> List[Path]:
    exp = ctx.config.experiment
    report = diagnostics.energy_report(
        spec=ctx.spec,
        grid=ctx.grid,
        params_list=ctx.config.param_list(),
        members=ctx.members,
        p=exp.p,
        seed=ctx.seed,
        threads=ctx.threads,
        u0=ctx.initial(),
        record_every=ctx.config.time.record_every or 1,
    )
    console.print_ensemble_report(report)
    return export_report(report, ctx.out_dir, ctx.metadata())


def _regularity(ctx: Context) -> List[Path]:
    exp = ctx.config.experiment
    report = diagnostics.regularity_report(
        spec=ctx.spec,
        grid=ctx.grid,
        params_list=ctx.config.param_list(),
        s=exp.s,
        members=ctx.members,
        seed=ctx.seed,
        output_times=ctx.config.time.output_times,
        threads=ctx.threads,
        u0=ctx.initial(),
        lam=exp.lam,
        kernel=exp.kernel,
        corpus_size=exp.corpus_size,
    )
    console.print_ensemble_report(report)
    return export_report(report, ctx.out_dir, ctx.metadata())


def _kinetic(ctx: Context) -> List[Path]:
    exp = ctx.config.experiment
    report = diagnostics.kinetic_report(
        spec=ctx.spec,
        grid=ctx.grid,
        params=ctx.config.params(),
        members=ctx.members,
        seed=ctx.seed,
        test_indices=exp.test_functions,
        xi_center=exp.xi_center,
        xi_width=exp.xi_width,
        velocity_points=exp.velocity_points,
        velocity_range=exp.velocity_range,
        deposition=exp.deposition,
        tail_R=exp.tail_R,
        chain_profile=build_test_profile(exp.phi),
        u0=ctx.initial(),
        threads=ctx.threads,
        record_every=ctx.config.time.record_every or 1,
    )
    console.print_ensemble_report(report)
    metadata = ctx.metadata()
    files = export_report(report, ctx.out_dir, metadata)
    estimate = report.artifacts.get("measures")
    if estimate is not None:
        files.extend(export_measures(estimate, ctx.out_dir, metadata))
    return files


def _ito(ctx: Context) -> List[Path]:
    exp = ctx.config.experiment
    report = diagnostics.ito_report(
        spec=ctx.spec,
        grid=ctx.grid,
        params=ctx.config.params(),
        phi=build_test_profile(exp.phi),
        psi=SpatialWeight(TrigonometricMode(wavevector=tuple(int(m) for m in exp.psi_wavevector))),
        drift=exp.drift,
        members=ctx.members,
        seed=ctx.seed,
        u0=ctx.initial(),
        threads=ctx.threads,
        record_every=ctx.config.time.record_every or 1,
        include_ito_correction=exp.ito_correction,
    )
    console.print_ensemble_report(report)
    return export_report(report, ctx.out_dir, ctx.metadata())


def _audit(ctx: Context) -> List[Path]:
    report = audit_hypotheses(ctx.spec, samples=ctx.config.experiment.audit_samples, seed=ctx.seed)
    console.print_audit_report(report)
    if not report.passed:
        logger.warning(f"audit: hypotheses failed: {report.failures()}")
    return export_report(report, ctx.out_dir, ctx.metadata(), name="audit")


HANDLERS: Dict[str, Callable[[Context], List[Path]]] = {
    "run": _run,
    "cascade": _cascade,
    "contraction": _contraction,
    "energy": _energy,
    "regularity": _regularity,
    "kinetic-check": _kinetic,
    "ito-check": _ito,
    "audit": _audit,
}


# ================================================================================
# ENTRY POINT
# ================================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spde-lab", description="Stochastic degenerate parabolic-hyperbolic laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help=f"JSON/YAML config (default: ${OUTPUT_DEFAULTS['config_env']})")
        p.add_argument("--out", default=None, help=f"output directory (env: {OUTPUT_DEFAULTS['out_dir_env']})")
        p.add_argument("--threads", type=int, default=None, help=f"worker threads (env: {OUTPUT_DEFAULTS['threads_env']})")
        p.add_argument("--reproducible", action="store_true", help="omit the timestamp from metadata")
        p.add_argument("--seed", type=int, default=None, help="override noise.seed")
    return parser


def _fallback_out_dir(flag: Optional[str]) -> Path:
    return Path(flag or os.environ.get(OUTPUT_DEFAULTS['out_dir_env']) or OUTPUT_DEFAULTS['out_dir'])


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = _fallback_out_dir(args.out)
    try:
        config = load_run_config(resolve_config_path(args.config), seed=args.seed)
        out_dir = resolve_out_dir(args.out, config)
        threads = resolve_threads(args.threads, config)
        ctx = Context(config, out_dir, threads, args.reproducible, args.command)
        console.print_header(args.command, ctx.metadata())
        files = HANDLERS[args.command](ctx)
    except SpdeEngineError as exc:
        error = {**exc.to_dict(), "command": args.command}
        sys.stderr.write(canonical_json(error) + "\n")
        try:
            write_error(error, out_dir)
        except OSError as io_exc:
            logger.error(f"could not write error.json to {out_dir}: {io_exc}")
        return exc.exit_code
    console.print_files(files)
    return 0


if __name__ == "__main__":
    sys.exit(main())
