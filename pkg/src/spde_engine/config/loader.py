"""
Runtime Config Loader
=====================
Load experiment configurations from JSON/YAML files and resolve the
runtime overrides (command-line flags, then environment, then file, then
defaults).
"""

from __future__ import annotations

import json
import os
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from spde_engine.config.run_config import RunConfig
from spde_engine.config.settings import ENSEMBLE_DEFAULTS, OUTPUT_DEFAULTS
from spde_engine.utils.exceptions import ConfigValidationError


def _load_yaml(path: Path) -> Dict[str, Any]:
    try:
        import yaml  # type: ignore
    except Exception as exc:
        raise ConfigValidationError("config", "PyYAML not installed. Install with `pip install pyyaml`.") from exc
    with path.open("r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigValidationError("config", f"YAML parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigValidationError("config", "YAML config must be a mapping at top level.")
    return data


def load_config_file(path: str) -> Dict[str, Any]:
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigValidationError("config", f"Config file not found: {path}")

    suffix = file_path.suffix.lower()
    if suffix in {".yml", ".yaml"}:
        return _load_yaml(file_path)
    if suffix == ".json":
        with file_path.open("r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigValidationError("config", f"JSON parse error at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigValidationError("config", "JSON config must be an object at top level.")
        return data

    raise ConfigValidationError("config", f"Unsupported config format: {suffix}. Use .json or .yaml/.yml.")


def resolve_config_path(flag: Optional[str], env: Optional[Mapping[str, str]] = None) -> str:
    env = os.environ if env is None else env
    path = flag or env.get(OUTPUT_DEFAULTS['config_env'])
    if not path:
        raise ConfigValidationError("config", f"no --config given and {OUTPUT_DEFAULTS['config_env']} is unset")
    return path


def load_run_config(path: str, seed: Optional[int] = None) -> RunConfig:
    """Parse, apply a seed override, and validate."""
    raw = load_config_file(path)
    config = RunConfig.from_dict(raw)
    if seed is not None:
        config = replace(config, noise=replace(config.noise, seed=int(seed)))
    return config


def resolve_out_dir(flag: Optional[str], config: RunConfig, env: Optional[Mapping[str, str]] = None) -> Path:
    env = os.environ if env is None else env
    for candidate in (flag, env.get(OUTPUT_DEFAULTS['out_dir_env']), config.out_dir):
        if candidate:
            return Path(candidate)
    return Path(OUTPUT_DEFAULTS['out_dir'])


def resolve_threads(flag: Optional[int], config: RunConfig, env: Optional[Mapping[str, str]] = None) -> int:
    env = os.environ if env is None else env
    if flag is not None:
        threads = flag
    elif env.get(OUTPUT_DEFAULTS['threads_env']):
        raw = env[OUTPUT_DEFAULTS['threads_env']]
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ConfigValidationError(OUTPUT_DEFAULTS['threads_env'], f"not an integer: {raw!r}") from exc
    else:
        threads = config.ensemble.threads or ENSEMBLE_DEFAULTS['threads']
    if threads < 1:
        raise ConfigValidationError("ensemble.threads", "must be >= 1")
    return int(threads)
