"""Thin-layer approximation of the dynamic interface condition."""

from .layer import (
    SIDES,
    LayerMesh,
    build_layer_mesh,
    layer_average,
    layer_average_matrix,
    layer_quadrature_error,
)
from .study import (
    LayerScheme,
    ThinLayerRun,
    ThinLayerStudy,
    convergence_study,
    layer_contraction_violations,
    layer_problem,
    run_perturbed,
)

__all__ = [
    "SIDES",
    "LayerMesh",
    "build_layer_mesh",
    "layer_average",
    "layer_average_matrix",
    "layer_quadrature_error",
    "LayerScheme",
    "ThinLayerRun",
    "ThinLayerStudy",
    "convergence_study",
    "layer_contraction_violations",
    "layer_problem",
    "run_perturbed",
]
