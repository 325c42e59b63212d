"""Score-adjustment math for suppressing repeat false positives.

Everything in this module is a pure function over plain floats and small
frozen dataclasses: no I/O, no hidden state, float64 throughout. The idea
is to pull a detector's score toward zero in proportion to how closely an
event's embedding matches a stored, analyst-confirmed false positive:

1. Cosine similarity to the closest stored annotation is passed through a
   steep monomial curve below the similarity threshold ``tau``, so weak
   resemblance earns almost no suppression while near-duplicates keep
   their full similarity.
2. An optional euclidean gate ``delta`` discounts matches that are far
   away in absolute terms even when the angle is small.
3. The product of the two is the false-positive confidence, which scales
   probability scores by ``1 - confidence`` and loss scores by a shifted
   sigmoid factor that stays strictly inside (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .pipeline import ScoredEvent

__all__ = [
    "PROBABILITY",
    "LOSS",
    "ScoreKind",
    "DimensionMismatch",
    "InvalidHyperparameter",
    "DomainError",
    "EmbeddingVector",
    "AdjustmentConfig",
    "AdjustmentCurve",
    "MatchResult",
    "AdjustmentOutcome",
    "CANONICAL_SHARPNESS",
    "cosine_similarity",
    "euclidean_distance",
    "fit_adjustment_curve",
    "adjusted_similarity",
    "distance_factor",
    "fp_confidence",
    "adjust_probability",
    "adjust_loss",
    "loss_factor",
    "adjust_scored",
    "adjust_event",
]

PROBABILITY = "probability"
LOSS = "loss"
ScoreKind = Literal["probability", "loss"]

# Documented sharpness grid; any real >= 1 is accepted.
CANONICAL_SHARPNESS = tuple(float(a) for a in range(10, 101, 10))


class DimensionMismatch(ValueError):
    """Two vectors of different dimension were combined."""


class InvalidHyperparameter(ValueError):
    """A configuration value violates its documented range."""


class DomainError(ValueError):
    """A score or similarity lies outside the domain of an adjustment."""


class EmbeddingVector:
    """One event's embedding: a fixed-dimension float64 vector.

    Entries must be finite and the euclidean norm must be positive and
    finite, since cosine similarity is undefined for the zero vector and
    unusable once the norm over- or underflows. Instances are immutable.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Sequence[float] | np.ndarray) -> None:
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding must be a non-empty one-dimensional sequence")
        if not np.isfinite(arr).all():
            raise ValueError("embedding entries must be finite")
        norm = float(np.linalg.norm(arr))
        if not (math.isfinite(norm) and norm > 0.0):
            raise ValueError("embedding must have a positive finite norm")
        arr.setflags(write=False)
        self._values = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "EmbeddingVector":
        # Fast path for rows already validated in bulk; arr must be float64,
        # finite, nonzero and never mutated afterwards.
        vec = object.__new__(cls)
        arr.setflags(write=False)
        vec._values = arr
        return vec

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self._values.shape[0]

    def __len__(self) -> int:
        return self._values.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return bool(np.array_equal(self._values, other._values))

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        head = ", ".join(f"{v:.4g}" for v in self._values[:4])
        tail = ", ..." if self.dim > 4 else ""
        return f"EmbeddingVector([{head}{tail}], dim={self.dim})"


@dataclass(frozen=True)
class AdjustmentConfig:
    """Hyperparameters governing one adjustment pass.

    Attributes:
        tau: Cosine similarity threshold in (0, 1). At or above it the
            similarity is trusted as-is; below it the curve applies.
        alpha: Sharpness of the curve (and of the loss sigmoid), >= 1.
            Low values suppress aggressively far below the threshold,
            high values confine suppression to near-duplicates.
        delta: Optional euclidean distance gate, > 0 when present. Absent
            means distance is ignored.
        score_kind: "probability" for scores in [0, 1], "loss" for
            nonnegative unbounded scores.
        alert_threshold: Strict lower bound for alerting on the adjusted
            score. Must lie in [0, 1] for probability scores.
    """

    tau: float = 0.95
    alpha: float = 60.0
    delta: float | None = None
    score_kind: str = PROBABILITY
    alert_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not (isinstance(self.tau, (int, float)) and 0.0 < self.tau < 1.0):
            raise InvalidHyperparameter(f"tau must lie in (0, 1), got {self.tau!r}")
        if not (isinstance(self.alpha, (int, float)) and self.alpha >= 1.0 and math.isfinite(self.alpha)):
            raise InvalidHyperparameter(f"alpha must be a finite real >= 1, got {self.alpha!r}")
        if self.delta is not None:
            if not (isinstance(self.delta, (int, float)) and self.delta > 0.0 and math.isfinite(self.delta)):
                raise InvalidHyperparameter(f"delta must be a finite real > 0 when set, got {self.delta!r}")
        if self.score_kind not in (PROBABILITY, LOSS):
            raise InvalidHyperparameter(f"score_kind must be {PROBABILITY!r} or {LOSS!r}, got {self.score_kind!r}")
        at = self.alert_threshold
        if not (isinstance(at, (int, float)) and math.isfinite(at) and at >= 0.0):
            raise InvalidHyperparameter(f"alert_threshold must be a finite real >= 0, got {at!r}")
        if self.score_kind == PROBABILITY and at > 1.0:
            raise InvalidHyperparameter(f"alert_threshold must lie in [0, 1] for probability scores, got {at!r}")


@dataclass(frozen=True)
class MatchResult:
    """Closest stored false positive for one query embedding."""

    theta_closest: float
    d_closest: float
    annotation_id: int


@dataclass(frozen=True)
class AdjustmentOutcome:
    """Per-event explanation of one adjustment.

    theta_closest / d_closest are None when the store held no annotations
    (no match: the score passes through untouched).
    """

    theta_closest: float | None
    d_closest: float | None
    theta_adjusted: float
    d_adjusted: float
    fp_confidence: float
    score_original: float
    score_adjusted: float
    annotation_id: int | None


def cosine_similarity(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Cosine of the angle between two embeddings, clamped to [-1, 1]."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"dimension mismatch: {u.dim} vs {v.dim}")
    num = float(np.dot(u.values, v.values))
    den = float(np.linalg.norm(u.values)) * float(np.linalg.norm(v.values))
    return min(1.0, max(-1.0, num / den))


def euclidean_distance(u: EmbeddingVector, v: EmbeddingVector) -> float:
    if u.dim != v.dim:
        raise DimensionMismatch(f"dimension mismatch: {u.dim} vs {v.dim}")
    return float(np.linalg.norm(u.values - v.values))


@dataclass(frozen=True)
class AdjustmentCurve:
    """The monomial ``theta ** alpha / tau ** (alpha - 1)``.

    This is the closed-form least-squares fit of the single basis
    ``c * theta ** alpha`` through the anchor points (0, 0) and (tau, tau),
    so no numerical solver is involved. It is continuous with the identity
    at tau, strictly increasing on [0, tau], and essentially flat near 0
    for large alpha.
    """

    tau: float
    alpha: float

    def __call__(self, theta: float) -> float:
        if theta <= 0.0:
            return 0.0
        # Log-space keeps theta ** alpha from underflowing before the divide.
        return math.exp(self.alpha * math.log(theta) - (self.alpha - 1.0) * math.log(self.tau))


def fit_adjustment_curve(tau: float, alpha: float) -> AdjustmentCurve:
    """Build the below-threshold similarity curve for (tau, alpha)."""
    if not (isinstance(tau, (int, float)) and 0.0 < tau < 1.0):
        raise InvalidHyperparameter(f"tau must lie in (0, 1), got {tau!r}")
    if not (isinstance(alpha, (int, float)) and alpha >= 1.0 and math.isfinite(alpha)):
        raise InvalidHyperparameter(f"alpha must be a finite real >= 1, got {alpha!r}")
    return AdjustmentCurve(float(tau), float(alpha))


def adjusted_similarity(theta_closest: float, cfg: AdjustmentConfig) -> float:
    """Similarity after the threshold curve; always in [0, 1].

    Negative similarity carries no false-positive evidence and maps to 0.
    At or above tau the raw similarity passes through unchanged.
    """
    t = max(theta_closest, 0.0)
    if t >= cfg.tau:
        return min(t, 1.0)
    curve = AdjustmentCurve(cfg.tau, cfg.alpha)
    # min() absorbs the one-ulp case where rounding lifts the curve above
    # the identity right at the threshold; mathematically f(t) <= t here.
    return min(curve(t), t)


def distance_factor(d_closest: float, delta: float | None = None) -> float:
    """Euclidean gate in (0, 1]; 1 when no gate is configured.

    A distance of zero means an exact repeat of a stored false positive,
    which is maximal evidence, so the factor caps at 1.
    """
    if delta is None:
        return 1.0
    if d_closest <= 0.0:
        return 1.0
    return min(delta / d_closest, 1.0)


def fp_confidence(theta_adjusted: float, d_adjusted: float) -> float:
    """Confidence that the event repeats a stored false positive, in [0, 1]."""
    return min(1.0, max(0.0, theta_adjusted * d_adjusted))


def adjust_probability(p_init: float, fp_cs: float) -> float:
    """Scale a probability score by (1 - confidence)."""
    if not (p_init >= 0.0 and p_init <= 1.0):
        raise DomainError(f"probability score must lie in [0, 1], got {p_init!r}")
    return p_init * (1.0 - fp_cs)


def _logistic(z: float) -> float:
    # Two-branch form: exp() of a large positive argument would overflow.
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def loss_factor(fp_cs: float, cfg: AdjustmentConfig) -> float:
    """Multiplier applied to loss scores: ``1 - 1 / (1 + e**(alpha * (tau - x)))``.

    Algebraically this is the logistic of ``alpha * (tau - x)``: exactly 0.5
    at x == tau, strictly decreasing in x, and confined to (0, 1). In
    float64 the value rounds to exactly 1.0 once ``alpha * (tau - x)``
    exceeds about 37; that saturation means "no adjustment" and is fine.
    """
    return _logistic(cfg.alpha * (cfg.tau - fp_cs))


def adjust_loss(l_init: float, fp_cs: float, cfg: AdjustmentConfig) -> float:
    """Scale a nonnegative loss score by the sigmoid factor."""
    if not l_init >= 0.0:
        raise DomainError(f"loss score must be >= 0, got {l_init!r}")
    return l_init * loss_factor(fp_cs, cfg)


def adjust_scored(
    score: float,
    theta_closest: float,
    d_closest: float,
    cfg: AdjustmentConfig,
    annotation_id: int | None = None,
) -> AdjustmentOutcome:
    """Full adjustment of one score given its closest-match geometry."""
    theta_adj = adjusted_similarity(theta_closest, cfg)
    d_adj = distance_factor(d_closest, cfg.delta)
    conf = fp_confidence(theta_adj, d_adj)
    if cfg.score_kind == PROBABILITY:
        adjusted = adjust_probability(score, conf)
    else:
        adjusted = adjust_loss(score, conf, cfg)
    return AdjustmentOutcome(
        theta_closest=theta_closest,
        d_closest=d_closest,
        theta_adjusted=theta_adj,
        d_adjusted=d_adj,
        fp_confidence=conf,
        score_original=score,
        score_adjusted=adjusted,
        annotation_id=annotation_id,
    )


def adjust_event(
    event: "ScoredEvent",
    match: MatchResult | None,
    cfg: AdjustmentConfig,
) -> AdjustmentOutcome:
    """Adjust one scored event against its closest stored false positive.

    With no match (empty store) the confidence is zero and the score passes
    through bit-identical.
    """
    if match is None:
        return AdjustmentOutcome(
            theta_closest=None,
            d_closest=None,
            theta_adjusted=0.0,
            d_adjusted=1.0,
            fp_confidence=0.0,
            score_original=event.score,
            score_adjusted=event.score,
            annotation_id=None,
        )
    return adjust_scored(event.score, match.theta_closest, match.d_closest, cfg, match.annotation_id)
