"""YAML scenario configuration files.

A file is a single mapping. Any scalar parameter may instead be given as a
list; lists expand to the Cartesian product of configurations, e.g.::

    case: 3
    gamma: [0.5, 1, 1.5, 2]
    sigma2_tap: [0.01, 0.05, 0.10]
    num_trials: 20
    seed: 7
"""
import itertools
import os
from pathlib import Path

import yaml

from .errors import ConfigError
from .experiments import ScenarioConfig

INT_KEYS = {"case", "L", "L_hat", "T", "T_data", "num_trials", "seed", "epochs", "batch_size",
            "gmm_components"}
FLOAT_KEYS = {"gamma", "sigma2_tap", "delta", "snr_db", "learning_rate"}
GRID_KEYS = INT_KEYS | FLOAT_KEYS
OPTION_KEYS = {"detectors", "output_dir"}
KNOWN_KEYS = GRID_KEYS | OPTION_KEYS
REQUIRED_KEYS = ("case", "gamma")

OUTPUT_DIR_ENV = "BCJRLAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"


def _coerce(key, value):
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}", key)
    if key in INT_KEYS:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}", key)
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}", key)
    return float(value)


def expand(raw):
    """Expand one configuration mapping into a list of :class:`ScenarioConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping of keys to values")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration key {unknown[0]!r}", unknown[0])
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", key)

    detectors = raw.get("detectors", ["conventional", "bcjrnet"])
    if isinstance(detectors, str):
        detectors = [detectors]
    if not isinstance(detectors, list):
        raise ConfigError("detectors: expected a list", "detectors")

    axes = []
    for key in sorted(k for k in raw if k in GRID_KEYS):
        values = raw[key] if isinstance(raw[key], list) else [raw[key]]
        if not values:
            raise ConfigError(f"{key}: empty list", key)
        axes.append([(key, _coerce(key, v)) for v in values])

    configs = []
    for combo in itertools.product(*axes):
        kwargs = {k: v for k, v in combo if v is not None}
        configs.append(ScenarioConfig(detectors=tuple(detectors), **kwargs))
    return configs


def load_config(path):
    """Read a configuration file; returns ``(configs, options)``."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    configs = expand(raw)
    return configs, {"output_dir": raw.get("output_dir")}


def parse_config(path):
    """Scenario configurations described by a YAML file."""
    return load_config(path)[0]


def resolve_output_dir(cli_value=None, config_value=None):
    return Path(cli_value or config_value or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)
