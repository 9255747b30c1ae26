"""Delaunay-Rips persistence diagrams for low-dimensional point clouds.

Core entry points:

- geometry.PointCloud, delaunay.delaunay_complex
- complexes.build_delaunay_rips / build_rips, the recursive simplex order
- persistence.compute_diagrams / extract_generators
- oracle.reduce (boundary-matrix ground truth)
- metrics.bottleneck / log_diagram / check_bounds
- experiments.generate and the experiment drivers
"""

from .diagram import PersistenceDiagram, PersistencePair
from .errors import (
    ContractError,
    DegeneracyError,
    DelripsError,
    InputError,
    InternalError,
    ResourceError,
    UnsupportedError,
    UsageError,
)
from .geometry import PointCloud, diameter, jung_constant, meb_radius
from .persistence import compute_diagrams, extract_generators

__version__ = "0.1.0"

__all__ = [
    "PersistenceDiagram",
    "PersistencePair",
    "PointCloud",
    "compute_diagrams",
    "extract_generators",
    "diameter",
    "meb_radius",
    "jung_constant",
    "DelripsError",
    "UsageError",
    "InputError",
    "ResourceError",
    "UnsupportedError",
    "DegeneracyError",
    "ContractError",
    "InternalError",
]
