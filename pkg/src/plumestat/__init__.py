"""Spatiotemporal analysis of groundwater solute monitoring data.

The package models monitoring data three ways and publishes the results
for decision-making: per-well local-linear trend smoothers with 95% bands
and Mann-Kendall tests, Delaunay-neighbour groundwater flow vectors per
monitoring interval, and a single penalized tensor-product B-spline
concentration smoother over (x, y, t) that yields time-slice grids,
animation frames, and trend/threshold indicator matrices.
"""

from .analysis import Analysis, AnalysisOptions, load_analysis, run_analysis, save_analysis
from .dataset import (
    Dataset,
    Diagnostic,
    Interval,
    MonitoringRecord,
    SubstitutionPolicy,
    WellLocation,
    apply_substitution,
    bin_intervals,
    load_dataset,
    load_dataset_dir,
    parse_value,
    validate,
)
from .errors import (
    ExtrapolationError,
    FitError,
    InsufficientDataError,
    ParseError,
    PlumestatError,
    RankDeficiencyError,
    TriangulationError,
    ValidationFailed,
)

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "AnalysisOptions",
    "Dataset",
    "Diagnostic",
    "ExtrapolationError",
    "FitError",
    "InsufficientDataError",
    "Interval",
    "MonitoringRecord",
    "ParseError",
    "PlumestatError",
    "RankDeficiencyError",
    "SubstitutionPolicy",
    "TriangulationError",
    "ValidationFailed",
    "WellLocation",
    "apply_substitution",
    "bin_intervals",
    "load_analysis",
    "load_dataset",
    "load_dataset_dir",
    "parse_value",
    "run_analysis",
    "save_analysis",
    "validate",
    "__version__",
]
