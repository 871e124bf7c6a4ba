"""CSV tables of trajectories, estimate audits and studies."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np
import pandas as pd

from ..mesh import BidomainMesh
from ..rothe import RotheTrajectory

_LOGGER = logging.getLogger(__name__)

#: 17 significant digits round-trip every double.
FLOAT_FORMAT = "%.17g"


def trajectory_frame(traj: RotheTrajectory) -> pd.DataFrame:
    """One row per ``(step, dof)``: columns ``step, t, dof_id, value``."""

    steps, dofs = traj.steps.shape
    return pd.DataFrame(
        {
            "step": np.repeat(np.arange(steps), dofs),
            "t": np.repeat(np.asarray(traj.times, dtype=float), dofs),
            "dof_id": np.tile(np.arange(dofs), steps),
            "value": traj.steps.ravel(),
        },
        columns=["step", "t", "dof_id", "value"],
    )


def interface_frame(traj: RotheTrajectory, mesh: BidomainMesh) -> pd.DataFrame:
    """Trace (continuous) or jump (bilateral) per interface node: ``step, t, node_id, trace_or_jump``."""

    series = traj.interface_series
    steps, count = series.shape
    return pd.DataFrame(
        {
            "step": np.repeat(np.arange(steps), count),
            "t": np.repeat(np.asarray(traj.times, dtype=float), count),
            "node_id": np.tile(np.asarray(mesh.interface_nodes, dtype=np.int64), steps),
            "trace_or_jump": series.ravel(),
        },
        columns=["step", "t", "node_id", "trace_or_jump"],
    )


def mesh_frames(mesh: BidomainMesh) -> Dict[str, pd.DataFrame]:
    nodes = pd.DataFrame(
        {"id": np.arange(mesh.n_nodes), "x": mesh.nodes[:, 0], "y": mesh.nodes[:, 1]},
        columns=["id", "x", "y"],
    )
    elements = pd.DataFrame(
        {
            "id": np.arange(mesh.n_elements),
            "n0": mesh.elements[:, 0],
            "n1": mesh.elements[:, 1],
            "n2": mesh.elements[:, 2],
            "subdomain": [int(tag) for tag in mesh.subdomain],
        },
        columns=["id", "n0", "n1", "n2", "subdomain"],
    )
    return {"nodes.csv": nodes, "elements.csv": elements}


class CsvExporter:
    """Write tables below one output directory with a fixed number format.

    Parameters
    ----------
    directory : str or Path
        Output directory; created on first write.
    float_format : str
        ``printf``-style format of every float cell.
    """

    def __init__(self, directory: Union[str, Path], *, float_format: str = FLOAT_FORMAT) -> None:
        self.directory = Path(directory)
        self.float_format = float_format

    def write(self, name: str, frame: pd.DataFrame) -> Path:
        if not name.endswith(".csv"):
            raise ValueError(f"Table names must end in '.csv', got {name!r}")
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / name
        frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n")
        _LOGGER.info("Wrote %s (%d rows)", path, len(frame))
        return path

    def write_all(self, tables: Mapping[str, pd.DataFrame]) -> Dict[str, Path]:
        return {name: self.write(name, frame) for name, frame in sorted(tables.items())}


def dump_mesh(mesh: BidomainMesh, directory: Union[str, Path], exporter: Optional[CsvExporter] = None) -> Dict[str, Path]:
    """Write ``nodes.csv`` and ``elements.csv`` for ``mesh``."""

    exporter = exporter or CsvExporter(directory)
    return exporter.write_all(mesh_frames(mesh))


__all__ = [
    "FLOAT_FORMAT",
    "CsvExporter",
    "dump_mesh",
    "interface_frame",
    "mesh_frames",
    "trajectory_frame",
]
