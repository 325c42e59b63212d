"""Deterministic JSON payload builders shared by the service and the CLI.

Building the same dict the same way every time is what makes a stored
batch re-serialize byte-identically on later reads.
"""

from __future__ import annotations

import json
from typing import Sequence

from ..core import AdjustmentConfig, AdjustmentOutcome
from ..pipeline import BatchResult

__all__ = ["outcome_to_dict", "batch_result_to_dict", "config_to_dict", "dumps"]


def outcome_to_dict(event_id: str | None, adj: AdjustmentOutcome) -> dict:
    return {
        "event_id": event_id,
        "score_original": adj.score_original,
        "score_adjusted": adj.score_adjusted,
        "fp_confidence": adj.fp_confidence,
        "theta_closest": adj.theta_closest,
        "d_closest": adj.d_closest,
        "theta_adjusted": adj.theta_adjusted,
        "d_adjusted": adj.d_adjusted,
        "annotation_id": adj.annotation_id,
    }


def batch_result_to_dict(
    result: BatchResult,
    line_numbers: Sequence[int] | None = None,
    extra_rejects: Sequence[dict] | None = None,
) -> dict:
    """Wire form of one batch result.

    line_numbers maps engine input positions back to NDJSON line numbers;
    without it the position itself (1-based) is reported. extra_rejects
    carries parse-stage rejects that never reached the engine.
    """
    rejects = list(extra_rejects or [])
    for reject in result.rejects:
        line = line_numbers[reject.index] if line_numbers is not None else reject.index + 1
        rejects.append({"line": line, "reason": reject.reason})
    rejects.sort(key=lambda r: (r["line"], r["reason"]))
    return {
        "batch_id": result.batch_id,
        "store_generation": result.store_generation,
        "outcomes": [outcome_to_dict(oc.event_id, oc.adjustment) for oc in result.outcomes],
        "alerts": list(result.alerts),
        "rejects": rejects,
    }


def config_to_dict(cfg: AdjustmentConfig) -> dict:
    return {
        "tau": cfg.tau,
        "alpha": cfg.alpha,
        "delta": cfg.delta,
        "score_kind": cfg.score_kind,
        "alert_threshold": cfg.alert_threshold,
    }


def dumps(payload: dict) -> bytes:
    return json.dumps(payload, separators=(",", ":")).encode("utf-8")
