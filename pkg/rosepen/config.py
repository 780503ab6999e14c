import json
import logging
import os
from pathlib import Path

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULTS = {
    "backend": "exact",
    "mode": "exact",
    "max_m": 5,
    "parallel_operations": 4,
    "log_level": "WARNING",
    "zero_tolerance": 1e-8,
}

BACKENDS = ("exact", "numeric")
MODES = ("exact", "float")


class Config:
    def __init__(self, config_path=None):
        if config_path is None:
            config_path = os.environ.get("ROSEPEN_CONFIG", "config.json")
        self.config_path = Path(config_path)
        self.load_config()

    def load_config(self):
        if not self.config_path.exists():
            logger.debug("no config at %s, using defaults", self.config_path)
            self.config = {"defaults": {}}
            return
        try:
            with open(self.config_path, "r") as f:
                self.config = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config file {self.config_path}: {exc}") from exc
        self.config.setdefault("defaults", {})

    def save_config(self):
        with open(self.config_path, "w") as f:
            json.dump(self.config, f, indent=2)

    def get_defaults(self):
        merged = dict(DEFAULTS)
        merged.update(self.config.get("defaults", {}))
        if "ROSEPEN_MAX_M" in os.environ:
            merged["max_m"] = os.environ["ROSEPEN_MAX_M"]
        if "ROSEPEN_LOG_LEVEL" in os.environ:
            merged["log_level"] = os.environ["ROSEPEN_LOG_LEVEL"]
        return merged

    def get_backend(self):
        backend = self.get_defaults()["backend"]
        if backend not in BACKENDS:
            raise ConfigError(f"unknown backend {backend!r}")
        return backend

    def get_mode(self):
        mode = self.get_defaults()["mode"]
        if mode not in MODES:
            raise ConfigError(f"unknown field mode {mode!r}")
        return mode

    def get_max_m(self):
        return self._positive_int("max_m")

    def get_parallel_operations(self):
        return self._positive_int("parallel_operations")

    def get_log_level(self):
        level = str(self.get_defaults()["log_level"]).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigError(f"unknown log level {level!r}")
        return level

    def get_zero_tolerance(self):
        try:
            tol = float(self.get_defaults()["zero_tolerance"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("zero_tolerance must be a number") from exc
        if tol <= 0:
            raise ConfigError("zero_tolerance must be positive")
        return tol

    def get_base_dir(self):
        return Path(os.path.dirname(os.path.abspath(self.config_path)))

    def _positive_int(self, key):
        value = self.get_defaults()[key]
        try:
            value = int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
        if value < 1:
            raise ConfigError(f"{key} must be positive, got {value}")
        return value
