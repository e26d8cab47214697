"""Configuration loader. Merges defaults.yaml with a preset, environment and CLI overrides."""

from __future__ import annotations

import copy
import os
from pathlib import Path
from typing import Any

import yaml

_CONFIG_DIR = Path(__file__).resolve().parent
_DEFAULTS = _CONFIG_DIR / "defaults.yaml"
PRESET_DIR = _CONFIG_DIR / "presets"


def load_config(override_path: str | None = None) -> dict:
    """Load config from defaults.yaml, optionally overridden by another YAML, plus env vars."""
    with open(_DEFAULTS) as f:
        cfg = yaml.safe_load(f)

    if override_path:
        path = Path(override_path)
        if not path.exists() and (PRESET_DIR / path.name).exists():
            path = PRESET_DIR / path.name
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {override_path}")
        with open(path) as f:
            overrides = yaml.safe_load(f) or {}
        _deep_merge(cfg, overrides)

    # Environment variable overrides
    env_map = {
        "RISKLAB_THREADS": ("run", "threads"),
        "RISKLAB_SEED": ("run", "seed"),
        "RISKLAB_OUTPUT_DIR": ("run", "output_dir"),
    }
    for env_var, key_path in env_map.items():
        val = os.environ.get(env_var)
        if val:
            _set_nested(cfg, key_path, _coerce(val, _get_nested(cfg, key_path)))

    return cfg


def apply_overrides(cfg: dict, overrides: dict[tuple[str, ...], Any]) -> dict:
    """Return a copy of ``cfg`` with dotted-path overrides (None values skipped)."""
    out = copy.deepcopy(cfg)
    for key_path, val in overrides.items():
        if val is not None:
            _set_nested(out, key_path, val)
    return out


def _deep_merge(base: dict, overrides: dict):
    for k, v in overrides.items():
        if k in base and isinstance(base[k], dict) and isinstance(v, dict):
            _deep_merge(base[k], v)
        else:
            base[k] = v


def _get_nested(d: dict, keys: tuple) -> Any:
    for k in keys:
        if not isinstance(d, dict) or k not in d:
            return None
        d = d[k]
    return d


def _set_nested(d: dict, keys: tuple, value):
    for k in keys[:-1]:
        d = d.setdefault(k, {})
    d[keys[-1]] = value


def _coerce(raw: str, default: Any) -> Any:
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


from config.experiment import EXPERIMENTS, ExperimentConfig  # noqa: E402
