from __future__ import annotations

import struct

import numpy as np
import pytest

from raad.core import DimensionMismatch, EmbeddingVector
from raad.store import (
    SNAPSHOT_MAGIC,
    CorruptSnapshot,
    FpStore,
    StorageFailure,
    UnsupportedVersion,
)

import oracles


def _unit(values) -> EmbeddingVector:
    arr = np.asarray(values, dtype=np.float64)
    return EmbeddingVector(arr / np.linalg.norm(arr))


def _populated_store(tmp_path=None) -> FpStore:
    store = FpStore()
    store.insert(_unit([1.0, 0.0, 0.0]), source_event_id="ev-1", annotator="ana")
    store.insert(_unit([0.0, 1.0, 0.0]), source_event_id="ev-2", annotator="bob", note="dup rule")
    store.insert(_unit([1.0, 1.0, 0.0]), source_event_id="ev-3", annotator="ana")
    return store


class TestInsertRemove:
    def test_ids_monotone_from_one(self):
        store = FpStore()
        ids = [store.insert(_unit([1.0, float(i)])) for i in range(5)]
        assert ids == [1, 2, 3, 4, 5]

    def test_removal_does_not_recycle_ids(self):
        store = FpStore()
        first = store.insert(_unit([1.0, 0.0]))
        store.remove(first)
        second = store.insert(_unit([0.0, 1.0]))
        assert second == first + 1

    def test_first_insert_fixes_dimension(self):
        store = FpStore()
        assert store.dim is None
        store.insert(_unit([1.0, 0.0, 0.0]))
        assert store.dim == 3
        with pytest.raises(DimensionMismatch):
            store.insert(_unit([1.0, 0.0]))

    def test_remove_missing_returns_false(self):
        store = _populated_store()
        assert store.remove(999) is False
        assert store.remove(2) is True
        assert store.remove(2) is False
        assert len(store) == 2

    def test_get(self):
        store = _populated_store()
        ann = store.get(2)
        assert ann is not None
        assert ann.source_event_id == "ev-2"
        assert ann.note == "dup rule"
        assert ann.label == "false_positive"
        assert store.get(42) is None

    def test_note_none_becomes_empty(self):
        store = FpStore()
        aid = store.insert(_unit([1.0, 0.0]), note=None)
        assert store.get(aid).note == ""


class TestNearest:
    def test_empty_store_returns_none(self):
        store = FpStore()
        assert store.nearest(_unit([1.0, 0.0])) is None
        assert store.nearest_batch([_unit([1.0, 0.0])]) == [None]

    def test_picks_highest_similarity(self):
        store = _populated_store()
        match = store.nearest(_unit([0.9, 0.1, 0.0]))
        assert match.annotation_id == 1

    def test_exact_duplicate_snaps_to_one(self):
        store = _populated_store()
        match = store.nearest(_unit([0.0, 1.0, 0.0]))
        assert match.annotation_id == 2
        assert match.theta_closest == 1.0
        assert match.d_closest == 0.0

    def test_tie_broken_by_lowest_id(self):
        store = FpStore()
        v = _unit([0.3, 0.4, 0.5])
        for _ in range(3):
            store.insert(v)
        match = store.nearest(v)
        assert match.annotation_id == 1

    def test_remove_promotes_second_best(self):
        store = _populated_store()
        query = _unit([0.9, 0.1, 0.0])
        assert store.nearest(query).annotation_id == 1
        store.remove(1)
        match = store.nearest(query)
        assert match.annotation_id == 3

    def test_read_your_writes(self):
        store = FpStore()
        query = _unit([0.0, 1.0])
        assert store.nearest(query) is None
        aid = store.insert(_unit([0.0, 1.0]))
        match = store.nearest(query)
        assert match is not None and match.annotation_id == aid

    def test_view_is_isolated_from_later_inserts(self):
        store = _populated_store()
        view = store.view()
        store.insert(_unit([0.5, 0.5, 0.5]))
        assert len(view) == 3
        assert len(store.view()) == 4
        assert store.view().generation > view.generation

    def test_dimension_mismatch_on_query(self):
        store = _populated_store()
        with pytest.raises(DimensionMismatch):
            store.nearest(_unit([1.0, 0.0]))

    def test_matches_brute_force_oracle(self, rng):
        store = FpStore()
        dim = 8
        vectors = rng.normal(size=(200, dim))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        for row in vectors:
            store.insert(EmbeddingVector(row))
        ids = np.arange(1, len(vectors) + 1)
        queries = rng.normal(size=(300, dim))
        queries[:25] = vectors[:25]  # force exact duplicates into the mix
        got = store.nearest_batch([EmbeddingVector(q) for q in queries])
        for match, query in zip(got, queries):
            ref_id, ref_theta, ref_d = oracles.brute_force_nearest_fast(query, ids, vectors)
            assert match.annotation_id == ref_id
            assert abs(match.theta_closest - ref_theta) <= 1e-12
            assert abs(match.d_closest - ref_d) <= 1e-12

    def test_batch_equals_repeated_single(self, rng):
        store = FpStore()
        for row in rng.normal(size=(50, 6)):
            store.insert(EmbeddingVector(row))
        queries = [EmbeddingVector(q) for q in rng.normal(size=(40, 6))]
        batch = store.nearest_batch(queries)
        singles = [store.nearest(q) for q in queries]
        # BLAS picks different kernels for 1-row and 40-row products, so
        # similarities may differ by one ulp; the winner must not.
        for b, s in zip(batch, singles):
            assert b.annotation_id == s.annotation_id
            assert abs(b.theta_closest - s.theta_closest) <= 1e-12
            assert abs(b.d_closest - s.d_closest) <= 1e-12


class TestSnapshot:
    def test_round_trip_bytes_identical(self, tmp_path):
        store = _populated_store()
        path = tmp_path / "fp.snap"
        store.save_snapshot(str(path))
        raw = path.read_bytes()
        assert raw.startswith(SNAPSHOT_MAGIC)

        restored = FpStore()
        restored.load_snapshot(str(path))
        assert len(restored) == 3
        assert restored.annotations() == store.annotations()

        again = tmp_path / "fp2.snap"
        restored.save_snapshot(str(again))
        assert again.read_bytes() == raw

    def test_round_trip_preserves_unicode_metadata(self, tmp_path):
        store = FpStore()
        store.insert(
            _unit([0.6, 0.8]),
            source_event_id="evt-Ω",
            annotator="søren",
            note="dedup: 重复事件 ✔",
            created_at_ms=1755400000000,
        )
        path = tmp_path / "fp.snap"
        store.save_snapshot(str(path))
        restored = FpStore.open(str(path))
        ann = restored.get(1)
        assert ann.annotator == "søren"
        assert ann.note == "dedup: 重复事件 ✔"
        assert ann.source_event_id == "evt-Ω"
        assert ann.created_at_ms == 1755400000000

    def test_empty_store_round_trip(self, tmp_path):
        path = tmp_path / "empty.snap"
        FpStore().save_snapshot(str(path))
        restored = FpStore.open(str(path))
        assert len(restored) == 0
        assert restored.dim is None

    def test_load_continues_id_sequence(self, tmp_path):
        store = _populated_store()
        path = tmp_path / "fp.snap"
        store.save_snapshot(str(path))
        restored = FpStore.open(str(path))
        assert restored.insert(_unit([1.0, 2.0, 3.0])) == 4

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "fp.snap"
        _populated_store().save_snapshot(str(path))
        raw = bytearray(path.read_bytes())
        raw[0] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptSnapshot):
            FpStore.open(str(path))

    def test_unsupported_version_rejected(self, tmp_path):
        path = tmp_path / "fp.snap"
        _populated_store().save_snapshot(str(path))
        raw = bytearray(path.read_bytes())
        raw[8:12] = struct.pack("<I", 2)
        path.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedVersion):
            FpStore.open(str(path))

    def test_truncation_rejected(self, tmp_path):
        path = tmp_path / "fp.snap"
        _populated_store().save_snapshot(str(path))
        raw = path.read_bytes()
        for cut in (len(raw) - 1, len(raw) // 2, 10):
            path.write_bytes(raw[:cut])
            with pytest.raises(CorruptSnapshot):
                FpStore.open(str(path))

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "fp.snap"
        _populated_store().save_snapshot(str(path))
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(CorruptSnapshot):
            FpStore.open(str(path))

    def test_failed_load_leaves_store_untouched(self, tmp_path):
        path = tmp_path / "fp.snap"
        _populated_store().save_snapshot(str(path))
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 3])

        store = FpStore()
        keep = store.insert(_unit([1.0, 1.0]))
        with pytest.raises(CorruptSnapshot):
            store.load_snapshot(str(path))
        assert len(store) == 1
        assert store.get(keep) is not None
        assert store.dim == 2


class TestDurability:
    def test_open_missing_path_starts_empty(self, tmp_path):
        path = tmp_path / "new.snap"
        store = FpStore.open(str(path))
        assert len(store) == 0
        assert not path.exists()

    def test_path_bound_store_persists_each_insert(self, tmp_path):
        path = tmp_path / "fp.snap"
        store = FpStore.open(str(path))
        store.insert(_unit([1.0, 0.0]), source_event_id="a")
        assert path.exists()
        mirror = FpStore.open(str(path))
        assert len(mirror) == 1

        store.insert(_unit([0.0, 1.0]), source_event_id="b")
        store.remove(1)
        mirror = FpStore.open(str(path))
        assert [a.source_event_id for a in mirror.annotations()] == ["b"]

    def test_insert_rolls_back_when_persist_fails(self, tmp_path, monkeypatch):
        path = tmp_path / "fp.snap"
        store = FpStore.open(str(path))
        store.insert(_unit([1.0, 0.0]))
        generation = store.generation

        def boom(path: str, data: bytes) -> None:
            raise StorageFailure("disk full")

        monkeypatch.setattr("raad.store._atomic_write_bytes", boom)
        with pytest.raises(StorageFailure):
            store.insert(_unit([0.0, 1.0]))
        monkeypatch.undo()

        assert len(store) == 1
        assert store.generation == generation
        assert store.insert(_unit([0.0, 1.0])) == 2  # id not burned by the failure
        assert len(FpStore.open(str(path))) == 2

    def test_remove_rolls_back_when_persist_fails(self, tmp_path, monkeypatch):
        path = tmp_path / "fp.snap"
        store = FpStore.open(str(path))
        store.insert(_unit([1.0, 0.0]))

        monkeypatch.setattr(
            "raad.store._atomic_write_bytes",
            lambda p, d: (_ for _ in ()).throw(StorageFailure("disk full")),
        )
        with pytest.raises(StorageFailure):
            store.remove(1)
        monkeypatch.undo()

        assert len(store) == 1
        assert store.nearest(_unit([1.0, 0.0])).annotation_id == 1

    def test_first_insert_failure_resets_dimension(self, tmp_path, monkeypatch):
        path = tmp_path / "fp.snap"
        store = FpStore.open(str(path))
        monkeypatch.setattr(
            "raad.store._atomic_write_bytes",
            lambda p, d: (_ for _ in ()).throw(StorageFailure("disk full")),
        )
        with pytest.raises(StorageFailure):
            store.insert(_unit([1.0, 0.0]))
        monkeypatch.undo()
        assert store.dim is None
        store.insert(_unit([1.0, 0.0, 0.0]))  # a different dimension is fine now
        assert store.dim == 3
