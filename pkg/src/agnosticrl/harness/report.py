"""Running recipes and writing their reports"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from ..core.config import ExperimentConfig
from ..core.errors import AcceptanceFailure, FormatError, ValidationError
from .recipes import get_recipe

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"

PathLike = Union[str, Path]


def _plain(value: Any) -> Any:
    """Python scalars with floats cut to 12 significant digits"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(FLOAT_FORMAT % value)
    return value


@dataclass
class RunReport:
    """Per-replication records and their aggregate for one recipe run.

    ``timings`` holds wall-clock seconds per replication; it is never written
    to report files so reruns stay byte-identical.
    """

    recipe: str
    seed: int
    columns: List[str]
    records: List[Dict[str, Any]]
    aggregate: Dict[str, Any]
    failures: List[str] = field(default_factory=list)
    timings: List[float] = field(default_factory=list, compare=False)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "recipe": self.recipe,
            "seed": self.seed,
            "columns": list(self.columns),
            "records": [{c: _plain(r.get(c)) for c in self.columns} for r in self.records],
            "aggregate": _plain(self.aggregate),
            "failures": list(self.failures),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        try:
            return cls(
                recipe=data["recipe"],
                seed=int(data["seed"]),
                columns=list(data["columns"]),
                records=list(data["records"]),
                aggregate=dict(data["aggregate"]),
                failures=list(data.get("failures", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"malformed report: {e}")


def _replicate(name: str, context: Any, config: ExperimentConfig, replication: int) -> Tuple[Dict[str, Any], float]:
    start = time.perf_counter()
    record = get_recipe(name).replicate(context, config, replication)
    return record, time.perf_counter() - start


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run the config's recipe for every replication and aggregate the records.

    Replications are reduced in index order whatever the worker count, and
    their random streams depend only on (seed, step, replication), so the
    report is a function of the config alone.

    Raises:
        ValidationError: If the recipe is unknown or its instance is invalid
    """
    recipe = get_recipe(config.recipe)
    context = recipe.prepare(config)
    task = partial(_replicate, recipe.name, context, config)
    indices = range(config.replications)
    logger.info("running %s: %d replications on %d worker(s)", recipe.name, config.replications, config.workers)
    if config.workers > 1 and config.replications > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(task, indices))
    else:
        results = [task(r) for r in indices]
    records = [record for record, _ in results]
    aggregate = recipe.summarize(records)
    aggregate["replications"] = len(records)
    failures = recipe.accept(aggregate, config.acceptance) if records else []
    for failure in failures:
        logger.warning("%s acceptance: %s", recipe.name, failure)
    return RunReport(
        recipe=recipe.name,
        seed=config.seed,
        columns=list(recipe.columns),
        records=records,
        aggregate=aggregate,
        failures=failures,
        timings=[seconds for _, seconds in results],
    )


def enforce_acceptance(report: RunReport) -> None:
    """Raise AcceptanceFailure when any acceptance threshold was missed"""
    if report.failures:
        raise AcceptanceFailure(f"{report.recipe}: " + "; ".join(report.failures), report)


def dumps_report(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        frame = pd.DataFrame(report.to_dict()["records"], columns=report.columns)
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    raise ValidationError(f"unknown report format '{fmt}'")


def emit_report(report: RunReport, path: PathLike, fmt: str = "json") -> Path:
    """Write the report as JSON (records plus aggregate) or CSV (records only)

    Raises:
        ValidationError: If the path cannot be written
    """
    path = Path(path)
    text = dumps_report(report, fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise ValidationError(f"cannot write report to {path}: {e}")
    return path


def load_report(path: PathLike) -> RunReport:
    """Read a JSON report written by emit_report"""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise ValidationError(f"cannot read report {path}: {e}")
    except json.JSONDecodeError as e:
        raise FormatError(f"report {path} is not valid JSON: {e}")
    return RunReport.from_dict(data)
