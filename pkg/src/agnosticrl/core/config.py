"""Experiment configuration backed by sectioned TOML files"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import toml

from .errors import ConfigError

SECTIONS = ("experiment", "instance", "algorithm", "acceptance")

DEFAULT_CONFIG = {
    "experiment": {
        "recipe": None,
        "seed": None,
        "replications": 1,
        "workers": 1,
        "output_dir": "results",
        "format": "json",
    },
    "instance": {},
    "algorithm": {},
    "acceptance": {},
}


def _check_flat(section: str, values: Any) -> Dict[str, Any]:
    if not isinstance(values, dict):
        raise ConfigError(f"[{section}] must be a table of key = value pairs")
    for key, value in values.items():
        if isinstance(value, dict):
            raise ConfigError(f"nested table [{section}.{key}] is not supported")
        if isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
            raise ConfigError(f"{section}.{key} must be a flat list")
    return dict(values)


@dataclass
class ExperimentConfig:
    """Configuration for one batch experiment"""

    recipe: str
    seed: int
    replications: int = 1
    workers: int = 1
    output_dir: str = "results"
    format: str = "json"
    instance: Dict[str, Any] = field(default_factory=dict)
    algorithm: Dict[str, Any] = field(default_factory=dict)
    acceptance: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Create ExperimentConfig from a sectioned dictionary

        Raises:
            ConfigError: On unknown sections, nested tables, a missing recipe
                or a missing seed
        """
        unknown = set(data) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
        experiment = dict(DEFAULT_CONFIG["experiment"])
        experiment.update(_check_flat("experiment", data.get("experiment", {})))
        if not experiment.get("recipe"):
            raise ConfigError("[experiment] recipe is required")
        if experiment.get("seed") is None:
            raise ConfigError("[experiment] seed is required; seeds are never implicit")
        try:
            seed = int(experiment["seed"])
            replications = int(experiment["replications"])
            workers = int(experiment["workers"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid [experiment] value: {e}")
        if seed < 0 or replications < 0 or workers < 1:
            raise ConfigError("seed and replications must be >= 0 and workers >= 1")
        if experiment["format"] not in ("json", "csv"):
            raise ConfigError(f"unknown report format '{experiment['format']}'")
        return cls(
            recipe=str(experiment["recipe"]),
            seed=seed,
            replications=replications,
            workers=workers,
            output_dir=str(experiment["output_dir"]),
            format=str(experiment["format"]),
            instance=_check_flat("instance", data.get("instance", {})),
            algorithm=_check_flat("algorithm", data.get("algorithm", {})),
            acceptance=_check_flat("acceptance", data.get("acceptance", {})),
        )

    def to_dict(self) -> dict:
        """Convert ExperimentConfig to a sectioned dictionary"""
        return {
            "experiment": {
                "recipe": self.recipe,
                "seed": self.seed,
                "replications": self.replications,
                "workers": self.workers,
                "output_dir": self.output_dir,
                "format": self.format,
            },
            "instance": dict(self.instance),
            "algorithm": dict(self.algorithm),
            "acceptance": dict(self.acceptance),
        }


def load_config(path: Path) -> ExperimentConfig:
    """Load an experiment config from a TOML file"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = toml.load(path)
    except toml.TomlDecodeError as e:
        raise ConfigError(f"corrupted config file {path}: {e}")
    config = ExperimentConfig.from_dict(data)
    base = path.parent
    for key, value in config.instance.items():
        if key.endswith("_file"):
            resolved = Path(value) if Path(value).is_absolute() else base / value
            if not resolved.exists():
                raise ConfigError(f"instance.{key} refers to a missing file: {resolved}")
            config.instance[key] = str(resolved)
    return config


def save_config(config: ExperimentConfig, path: Path) -> None:
    """Save an experiment config to a TOML file"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        toml.dump(config.to_dict(), f)


def get_param(section: Dict[str, Any], key: str, default: Optional[Any] = None, kind=None) -> Any:
    """Read an optional section value, converting it with kind when given"""
    value = section.get(key, default)
    if value is None or kind is None:
        return value
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be {kind.__name__}, got {value!r}")
