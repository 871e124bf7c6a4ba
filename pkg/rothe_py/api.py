"""High-level entry points: validate a config file, run it and write its tables.

Outputs are deterministic: DOF order, sweep order and the 17-digit float
format are fixed, so two runs of the same config write identical files.
"""
from __future__ import annotations

import dataclasses
import logging
import pathlib
from typing import Optional, Union

from .data import CsvExporter
from .pipeline import RunConfig, load_config
from .pipeline.experiments import ExperimentResult, run_experiment

_LOGGER = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


def validate_path(path: PathLike) -> RunConfig:
    """Parse ``path``; raises :class:`~rothe_py.errors.ConfigError` with every issue found."""

    config_path = pathlib.Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    return load_config(config_path)


def run_config(
    config: RunConfig, out_dir: Optional[PathLike] = None, *, max_workers: Optional[int] = None
) -> ExperimentResult:
    """Run the configured experiment and write its tables to ``out_dir`` (default ``[output] dir``)."""

    if out_dir is not None:
        config = dataclasses.replace(config, output=dataclasses.replace(config.output, dir=str(out_dir)))
    result = run_experiment(config, max_workers)
    written = CsvExporter(config.output.dir).write_all(result.tables)
    _LOGGER.info("%s experiment wrote %d files to %s", result.kind, len(written), config.output.dir)
    return result


def run_path(path: PathLike, out_dir: Optional[PathLike] = None) -> ExperimentResult:
    return run_config(validate_path(path), out_dir)


__all__ = ["run_config", "run_path", "validate_path"]
