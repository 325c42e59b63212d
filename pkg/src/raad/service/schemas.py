"""Request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..core import AdjustmentConfig

__all__ = [
    "ConfigModel",
    "ConfigOverride",
    "AnnotationRequest",
    "AnnotationResponse",
    "PreviewRequest",
    "OutcomeModel",
    "RejectModel",
    "BatchResponse",
]


class ConfigModel(BaseModel):
    """Wire form of the adjustment hyperparameters."""

    model_config = ConfigDict(extra="forbid")

    tau: float
    alpha: float
    delta: float | None = None
    score_kind: Literal["probability", "loss"]
    alert_threshold: float

    @classmethod
    def from_core(cls, cfg: AdjustmentConfig) -> "ConfigModel":
        return cls(
            tau=cfg.tau,
            alpha=cfg.alpha,
            delta=cfg.delta,
            score_kind=cfg.score_kind,  # type: ignore[arg-type]
            alert_threshold=cfg.alert_threshold,
        )

    def to_core(self) -> AdjustmentConfig:
        # Raises InvalidHyperparameter on semantic violations (e.g. tau=1.5).
        return AdjustmentConfig(
            tau=self.tau,
            alpha=self.alpha,
            delta=self.delta,
            score_kind=self.score_kind,
            alert_threshold=self.alert_threshold,
        )


class ConfigOverride(BaseModel):
    """Partial config for previews; unset fields inherit the live config."""

    model_config = ConfigDict(extra="forbid")

    tau: float | None = None
    alpha: float | None = None
    delta: float | None = None
    score_kind: Literal["probability", "loss"] | None = None
    alert_threshold: float | None = None

    def apply(self, base: AdjustmentConfig) -> AdjustmentConfig:
        values = {
            "tau": base.tau,
            "alpha": base.alpha,
            "delta": base.delta,
            "score_kind": base.score_kind,
            "alert_threshold": base.alert_threshold,
        }
        # model_fields_set distinguishes "delta": null (clear the gate)
        # from delta simply not mentioned (keep the configured gate).
        for name in self.model_fields_set:
            values[name] = getattr(self, name)
        return AdjustmentConfig(**values)


class AnnotationRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    batch_id: int
    event_id: str
    annotator: str
    note: str | None = None


class AnnotationResponse(BaseModel):
    annotation_id: int


class PreviewRequest(BaseModel):
    """What-if probe: no store lookup, no state change."""

    model_config = ConfigDict(extra="forbid")

    theta: float = Field(ge=-1.0, le=1.0)
    d: float = Field(default=0.0, ge=0.0)
    score: float
    config: ConfigOverride | None = None


class OutcomeModel(BaseModel):
    event_id: str | None = None
    theta_closest: float | None
    d_closest: float | None
    theta_adjusted: float
    d_adjusted: float
    fp_confidence: float
    score_original: float
    score_adjusted: float
    annotation_id: int | None


class RejectModel(BaseModel):
    line: int
    reason: str


class BatchResponse(BaseModel):
    """Shape of POST /v1/batches and GET /v1/batches/{id} bodies.

    Declared for the OpenAPI schema; the hot path serializes plain dicts
    of exactly this shape (see wire.py) to keep huge batches cheap.
    """

    batch_id: int
    store_generation: int
    outcomes: list[dict]
    alerts: list[str]
    rejects: list[RejectModel]
