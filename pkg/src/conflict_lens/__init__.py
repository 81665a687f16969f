"""Predict the RAN state produced by concurrent control apps from their individual profiles."""

__version__ = "0.1.0"

from .ecdf import Ecdf, build_ecdf, read_ecdf, step_interpolate, union_support, write_ecdf
from .metrics import (
    ConflictReport,
    DistancePair,
    conflict_report,
    int_distance,
    ks_distance,
    severity_index,
)
from .predictor import (
    PredictedCdf,
    PredictionReport,
    TimingSpec,
    WeightMode,
    WeightVector,
    effective_weights,
    predict,
    rate_weights,
    weighted_ecdf_average,
)
from .profile import Observation, Profile, extract_series, read_profile, write_profile

__all__ = [
    "ConflictReport", "DistancePair", "Ecdf", "Observation", "PredictedCdf", "PredictionReport",
    "Profile", "TimingSpec", "WeightMode", "WeightVector", "build_ecdf", "conflict_report",
    "effective_weights", "extract_series", "int_distance", "ks_distance", "predict",
    "rate_weights", "read_ecdf", "read_profile", "severity_index", "step_interpolate",
    "union_support", "weighted_ecdf_average", "write_ecdf", "write_profile",
]
