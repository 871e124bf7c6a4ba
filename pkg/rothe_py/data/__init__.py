"""Deterministic CSV output."""

from .export import FLOAT_FORMAT, CsvExporter, dump_mesh, interface_frame, mesh_frames, trajectory_frame

__all__ = ["FLOAT_FORMAT", "CsvExporter", "dump_mesh", "interface_frame", "mesh_frames", "trajectory_frame"]
