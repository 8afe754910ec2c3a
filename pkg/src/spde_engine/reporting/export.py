"""
Export Module
=============
Report, trajectory and measure exports.

Include:
- build_metadata: config, config hash, seed and version embedded in every file
- export_report: <name>.json (full) and <name>.csv (tabular)
- export_trajectory: long-format CSV, raw little-endian block + JSON sidecar
- export_measures: kinetic measure deposits as CSV
- write_error: machine-readable error JSON

CSV floats use 17 significant digits and a fixed header row; JSON is
canonical (sorted keys). With reproducible=True nothing time-dependent is
written, so identical configs give byte-identical files.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from spde_engine.config.run_config import RunConfig
from spde_engine.config.settings import OUTPUT_DEFAULTS
from spde_engine.config.thresholds import tolerance_table
from spde_engine.data.run_store import build_config_hash, canonical_json
from spde_engine.models.grid import Trajectory
from spde_engine.models.kinetic import KineticMeasureEstimate


def create_output_dir(output_dir: Any = OUTPUT_DEFAULTS['out_dir']) -> Path:
    """Create the output directory if needed."""
    path = Path(output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def build_metadata(
    config: RunConfig,
    command: str,
    reproducible: bool = False,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Self-describing header; RunConfig.from_dict(metadata['config']) == config."""
    from spde_engine import __version__

    config_dict = config.to_dict()
    metadata: Dict[str, Any] = {
        "command": command,
        "config": config_dict,
        "config_hash": build_config_hash(config_dict),
        "seed": config.noise.seed,
        "version": __version__,
        "tolerances": tolerance_table(),
    }
    if not reproducible:
        metadata["generated_at"] = datetime.now(timezone.utc).isoformat()
    if extra:
        metadata.update(extra)
    return metadata


# ================================================================================
# WRITERS
# ================================================================================

def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=OUTPUT_DEFAULTS['float_format'], lineterminator="\n")
    return path


def write_json(data: Any, path: Path) -> Path:
    path.write_text(canonical_json(data, indent=2) + "\n", encoding="utf-8")
    return path


def write_error(error: Dict[str, Any], out_dir: Path) -> Path:
    out_dir = create_output_dir(out_dir)
    return write_json(error, out_dir / "error.json")


# ================================================================================
# REPORTS
# ================================================================================

def export_report(report: Any, out_dir: Path, metadata: Dict[str, Any], name: Optional[str] = None) -> List[Path]:
    """Full JSON plus the tabular view when the report has one."""
    out_dir = create_output_dir(out_dir)
    stem = name or getattr(report, "name", "report")
    files = [write_json({"metadata": metadata, "report": report.to_dict()}, out_dir / f"{stem}.json")]
    to_frame = getattr(report, "to_frame", None)
    if to_frame is not None:
        frame = to_frame()
        if not frame.empty:
            files.append(write_csv(frame, out_dir / f"{stem}.csv"))
    return files


# ================================================================================
# FIELDS AND MEASURES
# ================================================================================

def export_trajectory(traj: Trajectory, out_dir: Path, metadata: Dict[str, Any], stem: str = "trajectory") -> List[Path]:
    """
    <stem>.csv     time, step, cell indices, positions, value
    <stem>.f64     snapshots as one '<f8' block, C order, shape (snapshots, *grid)
    <stem>.json    sidecar: shape, dtype, times, params, noise identity, metadata
    """
    out_dir = create_output_dir(out_dir)
    files = [write_csv(traj.to_frame(), out_dir / f"{stem}.csv")]
    raw = out_dir / f"{stem}.f64"
    raw.write_bytes(np.ascontiguousarray(traj.snapshots, dtype="<f8").tobytes())
    files.append(raw)
    sidecar = {
        "metadata": metadata,
        "block": {"file": raw.name, "dtype": "<f8", "order": "C", "shape": list(traj.snapshots.shape)},
        "trajectory": traj.metadata(),
    }
    files.append(write_json(sidecar, out_dir / f"{stem}.json"))
    return files


def load_trajectory_block(sidecar: Path) -> np.ndarray:
    """Snapshots array back from a sidecar written by export_trajectory."""
    import json

    description = json.loads(Path(sidecar).read_text(encoding="utf-8"))["block"]
    raw = Path(sidecar).parent / description["file"]
    return np.frombuffer(raw.read_bytes(), dtype=description["dtype"]).reshape(description["shape"])


def export_measures(est: KineticMeasureEstimate, out_dir: Path, metadata: Dict[str, Any], stem: str = "kinetic_measures") -> List[Path]:
    out_dir = create_output_dir(out_dir)
    return [
        write_csv(est.to_frame(), out_dir / f"{stem}.csv"),
        write_json({"metadata": metadata, "estimate": est.to_dict()}, out_dir / f"{stem}.json"),
    ]
