"""Pseudo-centroid clustering (K-MinMax and K-MinSum) on distance tables."""

from ._errors import *  # noqa: F401,F403
from ._errors import __all__ as _error_names
from .distance import (
    MINMAX,
    MINSUM,
    DistanceMatrix,
    SeparationMeasure,
    apply_weight,
    build_matrix,
    from_points,
    neighbor_order,
    pseudo_centroid,
)
from .engine import Cluster, Clustering, EngineConfig, RunReport, run_kpc
from .estimator import KMinMax, KMinSum
from .pipeline import RunConfig, execute, resolve
from .regret import quality, run_regret_threshold

__version__ = "0.1.0"

__all__ = [
    "MINMAX",
    "MINSUM",
    "DistanceMatrix",
    "SeparationMeasure",
    "apply_weight",
    "build_matrix",
    "from_points",
    "neighbor_order",
    "pseudo_centroid",
    "Cluster",
    "Clustering",
    "EngineConfig",
    "RunReport",
    "run_kpc",
    "KMinMax",
    "KMinSum",
    "RunConfig",
    "execute",
    "resolve",
    "quality",
    "run_regret_threshold",
    *_error_names,
]
