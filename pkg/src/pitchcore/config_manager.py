# pitchcore/config_manager.py
import json
import logging
import os
from typing import Any, Dict, Optional

from .utils import get_absolute_path

CONFIG_PATH = get_absolute_path("config/config.json")

DEFAULT_CONFIG: Dict[str, Any] = {
    "window_size": 400,
    "hop": 55,
    "f_min_pitch": 50.0,
    "f_max_pitch": 500.0,
    "pitch_band": None,
    "method": "asmdf",
    "picker": "global",
    "dip_threshold": 0.5,
    "energy_gate": 0.0,
    "workers": 1,
    "bench_sizes": [256, 512, 1024, 2048],
    "bench_reps": 3,
    "log_level": "INFO",
    "log_file": None,
}

_METHODS = ("asmdf", "amdf", "autocorr", "amdf_approx")
_PICKERS = ("global", "dip1", "dip2")
_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Loads the configuration file and merges it over the built-in defaults.

    Returns:
        A dictionary containing the configuration.

    Raises:
        FileNotFoundError: If an explicitly requested config file does not exist.
        ValueError: If a value is missing its required type or range.
    """
    config = dict(DEFAULT_CONFIG)
    config_path = path or CONFIG_PATH
    if os.path.exists(config_path):
        with open(config_path, 'r', encoding='utf-8') as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ValueError(f"Configuration file must hold a JSON object, got {type(loaded).__name__}.")
        config.update(loaded)
    elif path is not None:
        raise FileNotFoundError(f"Configuration file not found at: {config_path}")
    else:
        logging.getLogger("PitchCore").debug("No config at %s; using defaults.", config_path)

    # Names are matched case-insensitively.
    for key in ("method", "picker"):
        config[key] = str(config[key]).strip().lower()
    if config.get("pitch_band"):
        config["pitch_band"] = str(config["pitch_band"]).strip().lower()
    config["log_level"] = str(config["log_level"]).strip().upper()

    validate_config(config)
    return config


def validate_config(config: Dict[str, Any]) -> None:
    """Raises ValueError describing the first invalid value found."""
    try:
        _validate(config)
    except (TypeError, KeyError) as exc:
        raise ValueError(f"Malformed configuration value: {exc}") from None


def _validate(config: Dict[str, Any]) -> None:
    if int(config["window_size"]) < 2:
        raise ValueError(f"window_size must be at least 2, got {config['window_size']}.")
    # A null hop means window_size // 4.
    if config["hop"] is not None and int(config["hop"]) < 1:
        raise ValueError(f"hop must be at least 1, got {config['hop']}.")
    if not 0 < float(config["f_min_pitch"]) < float(config["f_max_pitch"]):
        raise ValueError(
            f"Pitch band must satisfy 0 < f_min_pitch < f_max_pitch, got "
            f"[{config['f_min_pitch']}, {config['f_max_pitch']}]."
        )
    if config["method"] not in _METHODS:
        raise ValueError(f"method must be one of {', '.join(_METHODS)}, got '{config['method']}'.")
    if config["picker"] not in _PICKERS:
        raise ValueError(f"picker must be one of {', '.join(_PICKERS)}, got '{config['picker']}'.")
    if not 0 < float(config["dip_threshold"]) <= 1:
        raise ValueError(f"dip_threshold must lie in (0, 1], got {config['dip_threshold']}.")
    if float(config["energy_gate"]) < 0:
        raise ValueError(f"energy_gate cannot be negative, got {config['energy_gate']}.")
    if int(config["workers"]) < 1:
        raise ValueError(f"workers must be at least 1, got {config['workers']}.")
    if any(int(n) < 5 for n in config["bench_sizes"]):
        raise ValueError(f"bench_sizes must all be at least 5, got {config['bench_sizes']}.")
    if int(config["bench_reps"]) < 1:
        raise ValueError(f"bench_reps must be at least 1, got {config['bench_reps']}.")
    if config["log_file"] is not None and not isinstance(config["log_file"], str):
        raise ValueError(f"log_file must be a path or null, got {config['log_file']!r}.")
    if config["log_level"] not in _LOG_LEVELS:
        raise ValueError(f"log_level must be one of {', '.join(_LOG_LEVELS)}, got '{config['log_level']}'.")


def save_config(config_data: Dict[str, Any], path: Optional[str] = None):
    """
    Saves the provided configuration dictionary to the config file.

    Args:
        config_data (Dict[str, Any]): The configuration dictionary to save.
        path: Destination; defaults to config/config.json.
    """
    with open(path or CONFIG_PATH, 'w', encoding='utf-8') as f:
        json.dump(config_data, f, indent=2)


class ConfigManager:
    """Loads and saves one configuration file."""

    def __init__(self, path: Optional[str] = None):
        self.path = path

    def load_config(self) -> Dict[str, Any]:
        return load_config(self.path)

    def save_config(self, config_data: Dict[str, Any]):
        save_config(config_data, self.path)
