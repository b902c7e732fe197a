"""Batch metrics for layout, table and key-information evaluation."""

from .detection import (
    COCO_IOU_THRESHOLDS,
    SINGLE_IOU_THRESHOLDS,
    Detection,
    GtBox,
    average_precision,
    mean_ap,
)
from .kie import PRF, Entity, KieDocument, Relation, kie_scores, re_hmean, ser_hmean
from .report import EvalReport
from .table import (
    DEFAULT_MAX_TOKENS,
    SampleResult,
    TableSample,
    batch_teds,
    score_samples,
    structure_accuracy,
)

__all__ = [
    "COCO_IOU_THRESHOLDS",
    "DEFAULT_MAX_TOKENS",
    "Detection",
    "Entity",
    "EvalReport",
    "GtBox",
    "KieDocument",
    "PRF",
    "Relation",
    "SINGLE_IOU_THRESHOLDS",
    "SampleResult",
    "TableSample",
    "average_precision",
    "batch_teds",
    "kie_scores",
    "mean_ap",
    "re_hmean",
    "score_samples",
    "ser_hmean",
    "structure_accuracy",
]
