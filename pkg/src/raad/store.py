"""Durable store of analyst-confirmed false-positive embeddings.

The store is an append-mostly collection of annotated embeddings with
exact nearest-neighbor retrieval by cosine similarity. Retrieval runs
against immutable point-in-time views, so a batch in flight never sees a
half-applied mutation; writes are serialized behind a lock and bump a
generation counter. Snapshots use a small self-describing binary format
(magic ``RAADFPS1``) that round-trips bit-exactly.
"""

from __future__ import annotations

import os
import struct
import tempfile
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from .core import DimensionMismatch, EmbeddingVector, MatchResult

__all__ = [
    "FALSE_POSITIVE",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "StorageFailure",
    "CorruptSnapshot",
    "UnsupportedVersion",
    "FpAnnotation",
    "StoreView",
    "FpStore",
]

SNAPSHOT_MAGIC = b"RAADFPS1"
SNAPSHOT_VERSION = 1
FALSE_POSITIVE = "false_positive"

# Cap similarity-matrix chunks at ~32 MiB of float64 so huge batches never
# materialize a (queries x annotations) matrix all at once.
_CHUNK_CELLS = 4 * 1024 * 1024


class StorageFailure(RuntimeError):
    """An I/O error while persisting or reading; in-memory state unchanged."""


class CorruptSnapshot(ValueError):
    """Snapshot bytes violate the format (bad magic, truncation, garbage)."""


class UnsupportedVersion(ValueError):
    """Snapshot declares a format version this build does not read."""


@dataclass(frozen=True)
class FpAnnotation:
    """One stored false positive.

    created_at_ms is a UTC epoch timestamp in milliseconds; ids are unique
    and strictly increasing in insertion order.
    """

    id: int
    embedding: EmbeddingVector
    source_event_id: str
    annotator: str
    created_at_ms: int
    note: str = ""
    label: str = FALSE_POSITIVE

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"annotation id must be >= 0, got {self.id}")
        if self.label != FALSE_POSITIVE:
            raise ValueError(f"unsupported label {self.label!r}")

    @property
    def created_at(self) -> datetime:
        return datetime.fromtimestamp(self.created_at_ms / 1000.0, tz=timezone.utc)


class StoreView:
    """Immutable snapshot of store contents at one generation.

    All retrieval math runs here so concurrent inserts can never shift
    results mid-batch. Rows are ordered by ascending annotation id, which
    makes the first-argmax tie-break deterministic: among equal similarities
    the lowest id wins.
    """

    __slots__ = ("generation", "dim", "annotations", "_ids", "_matrix", "_unit")

    def __init__(self, generation: int, dim: int | None, annotations: tuple[FpAnnotation, ...]) -> None:
        self.generation = generation
        self.dim = dim
        self.annotations = annotations
        n = len(annotations)
        if n and dim:
            matrix = np.empty((n, dim), dtype=np.float64)
            ids = np.empty(n, dtype=np.int64)
            for i, ann in enumerate(annotations):
                matrix[i] = ann.embedding.values
                ids[i] = ann.id
            norms = np.linalg.norm(matrix, axis=1)
            unit = matrix / norms[:, None]
            matrix.setflags(write=False)
            unit.setflags(write=False)
            ids.setflags(write=False)
            self._ids = ids
            self._matrix = matrix
            self._unit = unit
        else:
            self._ids = np.empty(0, dtype=np.int64)
            self._matrix = np.empty((0, dim or 0), dtype=np.float64)
            self._unit = self._matrix

    def __len__(self) -> int:
        return len(self.annotations)

    def nearest(self, query: EmbeddingVector) -> MatchResult | None:
        """Closest annotation by cosine similarity, or None when empty."""
        return self.nearest_batch([query])[0]

    def nearest_batch(self, queries: Sequence[EmbeddingVector]) -> list[MatchResult | None]:
        """Closest annotation per query; elementwise the same as nearest().

        Raises DimensionMismatch if any query disagrees with the store
        dimension (an empty, dimension-free store accepts anything).
        """
        queries = list(queries)
        if self.dim is not None:
            for q in queries:
                if q.dim != self.dim:
                    raise DimensionMismatch(f"query dimension {q.dim} does not match store dimension {self.dim}")
        if not self.annotations or not queries:
            return [None] * len(queries)

        q_matrix = np.empty((len(queries), self.dim), dtype=np.float64)
        for i, q in enumerate(queries):
            q_matrix[i] = q.values
        q_unit = q_matrix / np.linalg.norm(q_matrix, axis=1)[:, None]

        results: list[MatchResult | None] = []
        chunk = max(1, _CHUNK_CELLS // len(self.annotations))
        for start in range(0, len(queries), chunk):
            stop = min(start + chunk, len(queries))
            sims = q_unit[start:stop] @ self._unit.T
            best = np.argmax(sims, axis=1)
            rows = np.arange(stop - start)
            theta = sims[rows, best]
            dists = np.linalg.norm(q_matrix[start:stop] - self._matrix[best], axis=1)
            for r in range(stop - start):
                d = float(dists[r])
                # Zero distance means a bit-identical repeat, whose cosine is
                # exactly 1 regardless of rounding in the normalized product.
                t = 1.0 if d == 0.0 else min(1.0, max(-1.0, float(theta[r])))
                results.append(MatchResult(theta_closest=t, d_closest=d, annotation_id=int(self._ids[best[r]])))
        return results


def _atomic_write_bytes(path: str, data: bytes) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".fpstore-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _encode_snapshot(dim: int | None, annotations: Iterable[FpAnnotation]) -> bytes:
    anns = list(annotations)
    buf = bytearray()
    buf += SNAPSHOT_MAGIC
    buf += struct.pack("<IIQ", SNAPSHOT_VERSION, dim or 0, len(anns))
    for ann in anns:
        buf += struct.pack("<Qq", ann.id, ann.created_at_ms)
        for text in (ann.source_event_id, ann.annotator, ann.note):
            raw = text.encode("utf-8")
            buf += struct.pack("<I", len(raw))
            buf += raw
        buf += np.ascontiguousarray(ann.embedding.values, dtype="<f8").tobytes()
    return bytes(buf)


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptSnapshot("snapshot truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _decode_snapshot(data: bytes) -> tuple[int | None, list[FpAnnotation]]:
    rd = _Reader(data)
    if rd.take(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
        raise CorruptSnapshot("bad magic")
    (version,) = rd.unpack("<I")
    if version != SNAPSHOT_VERSION:
        raise UnsupportedVersion(f"snapshot format version {version} is not supported")
    dim, count = rd.unpack("<IQ")
    if dim == 0 and count > 0:
        raise CorruptSnapshot("zero dimension with nonzero count")
    annotations: list[FpAnnotation] = []
    prev_id = -1
    for _ in range(count):
        ann_id, created_ms = rd.unpack("<Qq")
        if ann_id <= prev_id:
            raise CorruptSnapshot("annotation ids not strictly increasing")
        prev_id = ann_id
        texts = []
        for _ in range(3):
            (length,) = rd.unpack("<I")
            try:
                texts.append(rd.take(length).decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise CorruptSnapshot(f"invalid UTF-8 in metadata: {exc}") from exc
        raw = rd.take(8 * dim)
        values = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        try:
            embedding = EmbeddingVector(values)
        except ValueError as exc:
            raise CorruptSnapshot(f"invalid embedding for id {ann_id}: {exc}") from exc
        annotations.append(
            FpAnnotation(
                id=int(ann_id),
                embedding=embedding,
                source_event_id=texts[0],
                annotator=texts[1],
                created_at_ms=int(created_ms),
                note=texts[2],
            )
        )
    if rd.pos != len(data):
        raise CorruptSnapshot(f"{len(data) - rd.pos} trailing bytes after last record")
    return (dim if dim else None), annotations


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


class FpStore:
    """Thread-safe store of false-positive annotations.

    When constructed with ``path`` every successful mutation is persisted
    to that file before the call returns; an I/O failure raises
    StorageFailure and rolls the in-memory state back, so callers never
    observe an acknowledged-but-lost write.
    """

    def __init__(self, dim: int | None = None, path: str | None = None) -> None:
        if dim is not None and dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self._dim = dim
        self._path = path
        self._annotations: list[FpAnnotation] = []
        self._next_id = 1
        self._generation = 0
        self._lock = threading.RLock()
        self._view: StoreView | None = None

    @classmethod
    def open(cls, path: str, dim: int | None = None) -> "FpStore":
        """Bind a store to a snapshot file, loading it if it exists."""
        store = cls(dim=dim, path=path)
        if os.path.exists(path):
            store.load_snapshot(path)
        return store

    @property
    def dim(self) -> int | None:
        with self._lock:
            return self._dim

    @property
    def generation(self) -> int:
        with self._lock:
            return self._generation

    @property
    def path(self) -> str | None:
        return self._path

    def __len__(self) -> int:
        with self._lock:
            return len(self._annotations)

    def annotations(self) -> tuple[FpAnnotation, ...]:
        with self._lock:
            return tuple(self._annotations)

    def get(self, annotation_id: int) -> FpAnnotation | None:
        with self._lock:
            for ann in self._annotations:
                if ann.id == annotation_id:
                    return ann
        return None

    def insert(
        self,
        embedding: EmbeddingVector,
        *,
        source_event_id: str = "",
        annotator: str = "",
        note: str | None = None,
        created_at_ms: int | None = None,
    ) -> int:
        """Record one false positive; returns its id.

        The first insert fixes the store dimension; later inserts must
        match it. Durable (when path-bound) before the id is returned.
        """
        with self._lock:
            if self._dim is not None and embedding.dim != self._dim:
                raise DimensionMismatch(f"embedding dimension {embedding.dim} does not match store dimension {self._dim}")
            prev_dim = self._dim
            ann = FpAnnotation(
                id=self._next_id,
                embedding=embedding,
                source_event_id=source_event_id,
                annotator=annotator,
                created_at_ms=_now_ms() if created_at_ms is None else created_at_ms,
                note=note or "",
            )
            self._annotations.append(ann)
            self._dim = embedding.dim
            self._next_id += 1
            try:
                self._persist_locked()
            except StorageFailure:
                self._annotations.pop()
                self._dim = prev_dim
                self._next_id -= 1
                raise
            self._generation += 1
            self._view = None
            return ann.id

    def remove(self, annotation_id: int) -> bool:
        """Delete one annotation; True if it existed."""
        with self._lock:
            for i, ann in enumerate(self._annotations):
                if ann.id == annotation_id:
                    removed = self._annotations.pop(i)
                    try:
                        self._persist_locked()
                    except StorageFailure:
                        self._annotations.insert(i, removed)
                        raise
                    self._generation += 1
                    self._view = None
                    return True
        return False

    def view(self) -> StoreView:
        """Immutable point-in-time view; cheap when nothing changed."""
        with self._lock:
            if self._view is None:
                self._view = StoreView(self._generation, self._dim, tuple(self._annotations))
            return self._view

    def nearest(self, query: EmbeddingVector) -> MatchResult | None:
        return self.view().nearest(query)

    def nearest_batch(self, queries: Sequence[EmbeddingVector]) -> list[MatchResult | None]:
        return self.view().nearest_batch(queries)

    def _persist_locked(self) -> None:
        if self._path is None:
            return
        data = _encode_snapshot(self._dim, self._annotations)
        try:
            _atomic_write_bytes(self._path, data)
        except OSError as exc:
            raise StorageFailure(f"could not persist store to {self._path}: {exc}") from exc

    def save_snapshot(self, path: str | None = None) -> None:
        """Write all annotations to a snapshot file."""
        target = path or self._path
        if target is None:
            raise ValueError("no snapshot path given and store is not path-bound")
        with self._lock:
            data = _encode_snapshot(self._dim, self._annotations)
        try:
            _atomic_write_bytes(target, data)
        except OSError as exc:
            raise StorageFailure(f"could not write snapshot to {target}: {exc}") from exc

    def load_snapshot(self, path: str | None = None) -> int:
        """Replace store contents from a snapshot file; returns the count.

        Parsing happens fully before any state is touched, so a corrupt or
        unreadable file leaves the store unchanged.
        """
        source = path or self._path
        if source is None:
            raise ValueError("no snapshot path given and store is not path-bound")
        try:
            with open(source, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise StorageFailure(f"could not read snapshot from {source}: {exc}") from exc
        dim, annotations = _decode_snapshot(data)
        with self._lock:
            self._dim = dim
            self._annotations = annotations
            self._next_id = (annotations[-1].id + 1) if annotations else 1
            self._generation += 1
            self._view = None
            return len(annotations)
