"""raad: retrieval-augmented suppression of repeat false positives.

A post-processing sidecar for anomaly detectors. Analysts annotate false
positives; future events whose embeddings closely match a stored
annotation get their scores pulled toward zero before alerting, without
retraining the detector. Annotations recorded during one batch are
guaranteed visible to the next.
"""

from .core import (
    CANONICAL_SHARPNESS,
    LOSS,
    PROBABILITY,
    AdjustmentConfig,
    AdjustmentCurve,
    AdjustmentOutcome,
    DimensionMismatch,
    DomainError,
    EmbeddingVector,
    InvalidHyperparameter,
    MatchResult,
    adjust_event,
    adjust_loss,
    adjust_probability,
    adjust_scored,
    adjusted_similarity,
    cosine_similarity,
    distance_factor,
    euclidean_distance,
    fit_adjustment_curve,
    fp_confidence,
    loss_factor,
)
from .diagnostics import (
    JACCARD_WARN_THRESHOLD,
    ConfusionDelta,
    DegenerateData,
    LabeledEmbeddingSet,
    LengthMismatch,
    SeparabilityReport,
    SingleClass,
    confusion_delta,
    jaccard_separability,
    roc_auc,
    separability_warning,
)
from .pipeline import (
    DEFAULT_RETENTION,
    BatchEngine,
    BatchReject,
    BatchResult,
    EventOutcome,
    ScoredEvent,
    UnknownEvent,
    evaluate_batch,
)
from .store import (
    FALSE_POSITIVE,
    CorruptSnapshot,
    FpAnnotation,
    FpStore,
    StorageFailure,
    StoreView,
    UnsupportedVersion,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "CANONICAL_SHARPNESS",
    "LOSS",
    "PROBABILITY",
    "AdjustmentConfig",
    "AdjustmentCurve",
    "AdjustmentOutcome",
    "DimensionMismatch",
    "DomainError",
    "EmbeddingVector",
    "InvalidHyperparameter",
    "MatchResult",
    "adjust_event",
    "adjust_loss",
    "adjust_probability",
    "adjust_scored",
    "adjusted_similarity",
    "cosine_similarity",
    "distance_factor",
    "euclidean_distance",
    "fit_adjustment_curve",
    "fp_confidence",
    "loss_factor",
    # diagnostics
    "JACCARD_WARN_THRESHOLD",
    "ConfusionDelta",
    "DegenerateData",
    "LabeledEmbeddingSet",
    "LengthMismatch",
    "SeparabilityReport",
    "SingleClass",
    "confusion_delta",
    "jaccard_separability",
    "roc_auc",
    "separability_warning",
    # pipeline
    "DEFAULT_RETENTION",
    "BatchEngine",
    "BatchReject",
    "BatchResult",
    "EventOutcome",
    "ScoredEvent",
    "UnknownEvent",
    "evaluate_batch",
    # store
    "FALSE_POSITIVE",
    "CorruptSnapshot",
    "FpAnnotation",
    "FpStore",
    "StorageFailure",
    "StoreView",
    "UnsupportedVersion",
]
