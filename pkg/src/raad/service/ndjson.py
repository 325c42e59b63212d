"""NDJSON ingestion: one scored event per line, per-line error isolation.

A malformed line never poisons the batch; it becomes a reject entry keyed
by its 1-based line number and the remaining lines proceed. Blank lines
are skipped. Only a body that is not UTF-8 text at all is a framing error
(the caller maps that to HTTP 400).
"""

from __future__ import annotations

import json
import math
from datetime import datetime

import numpy as np

from ..core import EmbeddingVector
from ..pipeline import ScoredEvent

__all__ = ["ParsedBatch", "parse_events", "event_to_line"]

REASON_INVALID_JSON = "invalid_json"
REASON_NOT_OBJECT = "not_an_object"
REASON_EVENT_ID = "invalid_event_id"
REASON_EMBEDDING = "invalid_embedding"
REASON_SCORE = "invalid_score"
REASON_OCCURRED_AT = "invalid_occurred_at"


class ParsedBatch:
    """Events that parsed, their source line numbers, and line rejects."""

    __slots__ = ("events", "line_numbers", "rejects")

    def __init__(self, events: list[ScoredEvent], line_numbers: list[int], rejects: list[dict]) -> None:
        self.events = events
        self.line_numbers = line_numbers
        self.rejects = rejects


def _parse_line(obj: object) -> ScoredEvent | str:
    if not isinstance(obj, dict):
        return REASON_NOT_OBJECT
    event_id = obj.get("event_id")
    if not isinstance(event_id, str) or not event_id:
        return REASON_EVENT_ID
    raw_embedding = obj.get("embedding")
    if not isinstance(raw_embedding, list) or not raw_embedding:
        return REASON_EMBEDDING
    try:
        embedding = EmbeddingVector(np.asarray(raw_embedding, dtype=np.float64))
    except (ValueError, TypeError):
        return REASON_EMBEDDING
    score = obj.get("score")
    if isinstance(score, bool) or not isinstance(score, (int, float)) or not math.isfinite(score):
        return REASON_SCORE
    occurred_at = None
    raw_ts = obj.get("occurred_at")
    if raw_ts is not None:
        if not isinstance(raw_ts, str):
            return REASON_OCCURRED_AT
        try:
            occurred_at = datetime.fromisoformat(raw_ts.replace("Z", "+00:00"))
        except ValueError:
            return REASON_OCCURRED_AT
    return ScoredEvent(event_id=event_id, embedding=embedding, score=float(score), occurred_at=occurred_at)


def parse_events(body: bytes | str) -> ParsedBatch:
    """Parse an NDJSON body. Raises UnicodeDecodeError on non-UTF-8 bytes."""
    text = body.decode("utf-8") if isinstance(body, (bytes, bytearray)) else body
    events: list[ScoredEvent] = []
    line_numbers: list[int] = []
    rejects: list[dict] = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError:
            rejects.append({"line": line_no, "reason": REASON_INVALID_JSON})
            continue
        parsed = _parse_line(obj)
        if isinstance(parsed, str):
            rejects.append({"line": line_no, "reason": parsed})
            continue
        events.append(parsed)
        line_numbers.append(line_no)
    return ParsedBatch(events, line_numbers, rejects)


def event_to_line(event: ScoredEvent) -> str:
    """Serialize one event back to its NDJSON wire form."""
    obj: dict = {
        "event_id": event.event_id,
        "embedding": [float(v) for v in event.embedding.values],
        "score": event.score,
    }
    if event.occurred_at is not None:
        obj["occurred_at"] = event.occurred_at.isoformat()
    return json.dumps(obj, separators=(",", ":"))
