"""Batch post-processing between a detector and its alert queue.

A batch of scored events is evaluated against a single immutable view of
the annotation store taken when the batch starts, so an annotation
recorded mid-batch never shifts in-flight results; it is guaranteed
visible to the next batch. Recent results are retained so analysts can
annotate straight from an alert they are looking at.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Iterable, Sequence

from .core import (
    LOSS,
    PROBABILITY,
    AdjustmentConfig,
    AdjustmentOutcome,
    EmbeddingVector,
    adjust_event,
)
from .store import FpStore, StoreView

__all__ = [
    "DEFAULT_RETENTION",
    "UnknownEvent",
    "ScoredEvent",
    "BatchReject",
    "EventOutcome",
    "BatchResult",
    "evaluate_batch",
    "BatchEngine",
]

DEFAULT_RETENTION = 1024

REASON_DIMENSION = "dimension_mismatch"
REASON_SCORE_RANGE = "score_out_of_range"
REASON_DUPLICATE = "duplicate_event_id"


class UnknownEvent(KeyError):
    """The (batch_id, event_id) pair is not in the retained window."""


@dataclass(frozen=True)
class ScoredEvent:
    """One event as emitted by the upstream detector."""

    event_id: str
    embedding: EmbeddingVector
    score: float
    occurred_at: datetime | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.event_id, str) or not self.event_id:
            raise ValueError("event_id must be a non-empty string")
        if isinstance(self.score, bool) or not isinstance(self.score, (int, float)):
            raise ValueError(f"score must be a real number, got {self.score!r}")
        if not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score!r}")


@dataclass(frozen=True)
class BatchReject:
    """One input event the batch refused, by position in the input."""

    index: int
    event_id: str | None
    reason: str


@dataclass(frozen=True)
class EventOutcome:
    event_id: str
    adjustment: AdjustmentOutcome


@dataclass(frozen=True)
class BatchResult:
    batch_id: int
    store_generation: int
    outcomes: tuple[EventOutcome, ...]
    alerts: tuple[str, ...]
    rejects: tuple[BatchReject, ...]

    def outcome_for(self, event_id: str) -> EventOutcome | None:
        for oc in self.outcomes:
            if oc.event_id == event_id:
                return oc
        return None


def _score_in_range(score: float, kind: str) -> bool:
    if kind == PROBABILITY:
        return 0.0 <= score <= 1.0
    return score >= 0.0


def evaluate_batch(
    events: Sequence[ScoredEvent],
    cfg: AdjustmentConfig,
    view: StoreView,
) -> tuple[tuple[EventOutcome, ...], tuple[str, ...], tuple[BatchReject, ...]]:
    """Pure batch evaluation against one store view.

    Deterministic: the same (events, cfg, view contents) always produce
    bit-identical outcomes, alerts and rejects. Invalid events land in the
    rejects list and the rest of the batch proceeds; every accepted event
    yields exactly one outcome, in input order.
    """
    accepted: list[ScoredEvent] = []
    rejects: list[BatchReject] = []
    seen: set[str] = set()
    for index, event in enumerate(events):
        if view.dim is not None and event.embedding.dim != view.dim:
            rejects.append(BatchReject(index, event.event_id, REASON_DIMENSION))
            continue
        if not _score_in_range(event.score, cfg.score_kind):
            rejects.append(BatchReject(index, event.event_id, REASON_SCORE_RANGE))
            continue
        if event.event_id in seen:
            rejects.append(BatchReject(index, event.event_id, REASON_DUPLICATE))
            continue
        seen.add(event.event_id)
        accepted.append(event)

    matches = view.nearest_batch([e.embedding for e in accepted])
    outcomes = tuple(
        EventOutcome(event.event_id, adjust_event(event, match, cfg))
        for event, match in zip(accepted, matches)
    )
    alerts = tuple(oc.event_id for oc in outcomes if oc.adjustment.score_adjusted > cfg.alert_threshold)
    return outcomes, alerts, tuple(rejects)


@dataclass(frozen=True)
class _Retained:
    result: BatchResult
    events_by_id: dict[str, ScoredEvent]


class BatchEngine:
    """Stateful wrapper: batch numbering, retention, annotation feedback.

    The adjustment config is read once when a batch starts, so a config
    update acknowledged before that point governs the batch and a later
    one does not.
    """

    def __init__(
        self,
        store: FpStore,
        config: AdjustmentConfig | None = None,
        retention: int = DEFAULT_RETENTION,
    ) -> None:
        if retention < 1:
            raise ValueError(f"retention must be >= 1, got {retention}")
        self._store = store
        self._config = config or AdjustmentConfig()
        self._retention = retention
        self._lock = threading.Lock()
        self._batches: OrderedDict[int, _Retained] = OrderedDict()
        self._next_batch_id = 1

    @property
    def store(self) -> FpStore:
        return self._store

    @property
    def retention(self) -> int:
        return self._retention

    @property
    def config(self) -> AdjustmentConfig:
        with self._lock:
            return self._config

    def set_config(self, cfg: AdjustmentConfig) -> None:
        with self._lock:
            self._config = cfg

    def process_batch(
        self,
        events: Iterable[ScoredEvent],
        cfg: AdjustmentConfig | None = None,
    ) -> BatchResult:
        """Adjust one batch against the store as of the moment it starts."""
        events = tuple(events)
        effective = cfg if cfg is not None else self.config
        view = self._store.view()
        outcomes, alerts, rejects = evaluate_batch(events, effective, view)
        events_by_id = {oc.event_id: event for oc, event in _pair_outcomes(outcomes, events)}
        with self._lock:
            batch_id = self._next_batch_id
            self._next_batch_id += 1
            result = BatchResult(
                batch_id=batch_id,
                store_generation=view.generation,
                outcomes=outcomes,
                alerts=alerts,
                rejects=rejects,
            )
            self._batches[batch_id] = _Retained(result, events_by_id)
            while len(self._batches) > self._retention:
                self._batches.popitem(last=False)
        return result

    def annotate_from_outcome(
        self,
        batch_id: int,
        event_id: str,
        annotator: str,
        note: str | None = None,
    ) -> int:
        """Record a retained event's embedding as a confirmed false positive.

        Durable before returning; visible to every batch that starts after
        this call. Raises UnknownEvent for ids outside the retained window.
        """
        with self._lock:
            retained = self._batches.get(batch_id)
            event = retained.events_by_id.get(event_id) if retained else None
        if event is None:
            raise UnknownEvent(f"event {event_id!r} in batch {batch_id} is not retained")
        return self._store.insert(
            event.embedding,
            source_event_id=event_id,
            annotator=annotator,
            note=note,
        )

    def get_batch(self, batch_id: int) -> BatchResult | None:
        with self._lock:
            retained = self._batches.get(batch_id)
            return retained.result if retained else None

    def latest_batch(self) -> BatchResult | None:
        with self._lock:
            if not self._batches:
                return None
            return next(reversed(self._batches.values())).result


def _pair_outcomes(
    outcomes: Sequence[EventOutcome],
    events: Sequence[ScoredEvent],
) -> Iterable[tuple[EventOutcome, ScoredEvent]]:
    by_id = {}
    for event in events:
        by_id.setdefault(event.event_id, event)
    for oc in outcomes:
        yield oc, by_id[oc.event_id]
