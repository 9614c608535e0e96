"""Reconstruction of the complex joint spectral amplitude of energy-time
entangled photon pairs from four joint intensity measurements, with a
closed-loop forward model (optical-gating simulation and Wiener
preprocessing) for end-to-end verification."""

from .grids import (
    Axis,
    ComplexGrid2D,
    IntensityGrid2D,
    conjugate_axis,
    load_grid,
    save_grid,
    total_power,
    transform_photon,
)
from .retrieve import (
    MeasurementSet,
    RetrievalConfig,
    RetrievalResult,
    frog_error,
    project_magnitude,
    run_retrieval,
)
from .synth import GaussianStateParams, apply_chirp, gaussian_jsa, schmidt_purity, tbp_gaussian

__all__ = [
    "Axis",
    "ComplexGrid2D",
    "IntensityGrid2D",
    "GaussianStateParams",
    "MeasurementSet",
    "RetrievalConfig",
    "RetrievalResult",
    "apply_chirp",
    "conjugate_axis",
    "frog_error",
    "gaussian_jsa",
    "load_grid",
    "project_magnitude",
    "run_retrieval",
    "save_grid",
    "schmidt_purity",
    "tbp_gaussian",
    "total_power",
    "transform_photon",
]

__version__ = "0.1.0"
