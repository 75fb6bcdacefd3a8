"""Domain types, prediction semantics, validation and normal-distribution numerics."""

from rawlsian.core.models import (
    Guarantee,
    LinearThresholdModel,
    ScoreThresholdModel,
    ThresholdClassifier,
    predict,
)
from rawlsian.core.numerics import normal_cdf, normal_quantile
from rawlsian.core.types import (
    EvaluationReport,
    LabeledDataset,
    MomentTable,
    Moments,
    SubPopId,
    Violation,
    all_subpops,
)
from rawlsian.core.validation import validate_moment_table

__all__ = [
    "EvaluationReport",
    "Guarantee",
    "LabeledDataset",
    "LinearThresholdModel",
    "MomentTable",
    "Moments",
    "ScoreThresholdModel",
    "SubPopId",
    "ThresholdClassifier",
    "Violation",
    "all_subpops",
    "normal_cdf",
    "normal_quantile",
    "predict",
    "validate_moment_table",
]
