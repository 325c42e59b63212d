"""Service-level configuration: listen address, store binding, defaults."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from ..core import AdjustmentConfig
from ..pipeline import DEFAULT_RETENTION

__all__ = ["ServiceConfig", "load_service_config"]


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = "127.0.0.1:8000"
    store_path: str | None = None
    adjustment: AdjustmentConfig = field(default_factory=AdjustmentConfig)
    retention: int = DEFAULT_RETENTION
    anchors: int | None = None
    auth_token: str | None = None

    @property
    def host(self) -> str:
        host, _, _ = self.listen.rpartition(":")
        return host or self.listen

    @property
    def port(self) -> int:
        _, _, port = self.listen.rpartition(":")
        return int(port) if port.isdigit() else 8000

    def resolved_token(self) -> str | None:
        return self.auth_token or os.environ.get("RAAD_TOKEN") or None


def load_service_config(path: str | None = None, **overrides) -> ServiceConfig:
    """Build a ServiceConfig from an optional JSON file plus overrides.

    The file may carry any ServiceConfig field; "adjustment" nests the
    score-adjustment hyperparameters. Overrides with value None are
    ignored so CLI flags can be passed through unconditionally.
    """
    data: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    adj_data = dict(data.get("adjustment", {}))
    for key in ("tau", "alpha", "delta", "score_kind", "alert_threshold"):
        if overrides.get(key) is not None:
            adj_data[key] = overrides[key]
    adjustment = AdjustmentConfig(**adj_data)
    cfg = ServiceConfig(
        listen=data.get("listen", "127.0.0.1:8000"),
        store_path=data.get("store_path"),
        adjustment=adjustment,
        retention=int(data.get("retention", DEFAULT_RETENTION)),
        anchors=data.get("anchors"),
        auth_token=data.get("auth_token"),
    )
    for key in ("listen", "store_path", "retention", "anchors", "auth_token"):
        if overrides.get(key) is not None:
            cfg = replace(cfg, **{key: overrides[key]})
    return cfg
