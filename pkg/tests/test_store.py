"""Append-only log store: durability, supersession, and crash recovery."""

import json

import pytest

from protag.errors import InputError, StoreCorruptError
from protag.store import (
    KIND_ANNOTATION,
    STATUS_FAILED,
    STATUS_SUBMITTED,
    AnnotationRecord,
    LogStore,
    store_runs,
)


def _record(doc="d1", labeler="A1", selected=("techcorp",), **overrides):
    base = dict(
        doc_id=doc,
        labeler_id=labeler,
        selected=frozenset(selected),
        rationale="because",
    )
    base.update(overrides)
    return AnnotationRecord(**base)


def _ticking_clock():
    count = {"n": 0}

    def clock() -> str:
        count["n"] += 1
        return f"2026-01-01T00:00:{count['n']:02d}+00:00"

    return clock


# --- basic writes and the LWW view -----------------------------------------------------


def test_empty_store_initializes_with_header(tmp_path):
    path = tmp_path / "store.jsonl"
    with LogStore(path) as store:
        assert store.annotations() == []
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    head = json.loads(lines[0])
    assert head["kind"] == "store"


def test_appends_are_readable_and_ordered(tmp_path):
    with LogStore(tmp_path / "s.jsonl", clock=_ticking_clock()) as store:
        store.append_annotation(_record(doc="d1"))
        store.append_annotation(_record(doc="d2", selected=("globalsoft",)))
        records = store.annotations()
    assert [r.doc_id for r in records] == ["d1", "d2"]
    assert records[0].created_at.startswith("2026-01-01")


def test_last_write_wins_per_doc_and_labeler(tmp_path):
    with LogStore(tmp_path / "s.jsonl") as store:
        store.append_annotation(_record(selected=("techcorp",)))
        store.append_annotation(_record(selected=("globalsoft",)))
        store.append_annotation(_record(labeler="A2", selected=("techcorp",)))
        view = store.annotations_by_labeler()
    assert view["A1"]["d1"].selected == frozenset({"globalsoft"})
    assert view["A2"]["d1"].selected == frozenset({"techcorp"})


def test_superseded_record_moves_to_new_position(tmp_path):
    with LogStore(tmp_path / "s.jsonl") as store:
        store.append_annotation(_record(doc="d1"))
        store.append_annotation(_record(doc="d2"))
        store.append_annotation(_record(doc="d1", selected=("globalsoft",)))
        assert [r.doc_id for r in store.annotations()] == ["d2", "d1"]


def test_full_history_survives_supersession(tmp_path):
    with LogStore(tmp_path / "s.jsonl") as store:
        store.append_annotation(_record(selected=("a",)))
        store.append_annotation(_record(selected=("b",)))
        history = list(store.scan(kind=KIND_ANNOTATION))
    assert [h["selected"] for h in history] == [["a"], ["b"]]


def test_submitted_doc_ids_skip_failed_records(tmp_path):
    with LogStore(tmp_path / "s.jsonl") as store:
        store.append_annotation(_record(doc="d1"))
        store.append_annotation(_record(doc="d2", status=STATUS_FAILED))
        assert store.submitted_doc_ids("A1") == {"d1"}


def test_resolutions_round_trip(tmp_path):
    with LogStore(tmp_path / "s.jsonl") as store:
        store.append_resolution("abc123", "reviewed, human is right")
        store.append_resolution("def456", "model hallucinated")
        res = store.resolutions()
    assert set(res) == {"abc123", "def456"}
    assert res["abc123"]["note"] == "reviewed, human is right"


def test_record_validation(tmp_path):
    with LogStore(tmp_path / "s.jsonl") as store:
        with pytest.raises(InputError):
            store.append_annotation(_record(doc=""))
        with pytest.raises(InputError):
            store.append_annotation(_record(labeler=""))
        with pytest.raises(InputError):
            store.append_annotation(_record(status="draft"))
        with pytest.raises(InputError):
            store.append_annotation(_record(selected=("", "x")))
        with pytest.raises(InputError):
            store.append_resolution("", "note")


# --- reopen and recovery ------------------------------------------------------------------


def test_reopen_preserves_view(tmp_path):
    path = tmp_path / "s.jsonl"
    with LogStore(path) as store:
        store.append_annotation(_record(doc="d1"))
        store.append_annotation(_record(doc="d1", selected=("globalsoft",)))
        store.append_annotation(_record(doc="d2", labeler="A2"))
    with LogStore(path) as store:
        view = store.annotations_by_labeler()
    assert view["A1"]["d1"].selected == frozenset({"globalsoft"})
    assert view["A2"]["d2"].selected == frozenset({"techcorp"})


def test_torn_partial_tail_is_truncated_with_warning(tmp_path, caplog):
    path = tmp_path / "s.jsonl"
    with LogStore(path) as store:
        store.append_annotation(_record(doc="d1"))
    intact = path.read_bytes()
    path.write_bytes(intact + b'{"kind":"annotation","doc_id":"d2","labe')
    with caplog.at_level("WARNING"):
        with LogStore(path) as store:
            assert [r.doc_id for r in store.annotations()] == ["d1"]
    assert any("torn" in r.message for r in caplog.records)
    assert path.read_bytes() == intact


def test_torn_but_complete_tail_is_repaired_not_dropped(tmp_path):
    path = tmp_path / "s.jsonl"
    with LogStore(path) as store:
        store.append_annotation(_record(doc="d1"))
    tail = json.dumps(
        {
            "kind": "annotation", "doc_id": "d2", "labeler_id": "A1",
            "selected": ["x"], "added_entities": [], "rationale": "",
            "created_at": "t", "status": STATUS_SUBMITTED,
        }
    ).encode("utf-8")
    path.write_bytes(path.read_bytes() + tail)  # record written, newline lost
    with LogStore(path) as store:
        assert {r.doc_id for r in store.annotations()} == {"d1", "d2"}
    assert path.read_bytes().endswith(b"\n")


def test_mid_file_corruption_is_refused(tmp_path):
    path = tmp_path / "s.jsonl"
    with LogStore(path) as store:
        store.append_annotation(_record(doc="d1"))
        store.append_annotation(_record(doc="d2"))
    lines = path.read_bytes().split(b"\n")
    lines[1] = b'{"kind":"annotation","doc_id":'  # damage a committed record
    path.write_bytes(b"\n".join(lines))
    with pytest.raises(StoreCorruptError) as err:
        LogStore(path)
    assert "mid-file" in str(err.value)


def test_wrong_kind_header_is_refused(tmp_path):
    path = tmp_path / "s.jsonl"
    path.write_text('{"schema_version":"v1","kind":"corpus"}\n')
    with pytest.raises(StoreCorruptError):
        LogStore(path)


def test_unknown_record_kind_is_refused(tmp_path):
    path = tmp_path / "s.jsonl"
    with LogStore(path) as store:
        store.append_annotation(_record())
    with open(path, "ab") as fh:
        fh.write(b'{"kind":"mystery"}\n')
    with pytest.raises(StoreCorruptError):
        LogStore(path)


def test_recovery_after_many_random_truncations(tmp_path):
    path = tmp_path / "s.jsonl"
    with LogStore(path, clock=_ticking_clock()) as store:
        for i in range(50):
            store.append_annotation(
                _record(doc=f"d{i % 7}", labeler=f"A{i % 3}", selected=(f"org{i}",))
            )
    intact = path.read_bytes()

    import random

    rng = random.Random(13)
    for _ in range(40):
        cut = rng.randrange(len(intact) // 2, len(intact))
        path.write_bytes(intact[:cut])
        with LogStore(path) as store:
            records = store.annotations()
            # Every surviving record is a real committed record.
            for r in records:
                assert r.selected and r.doc_id.startswith("d")
        # The repaired file reopens cleanly and accepts new appends.
        with LogStore(path) as store:
            store.append_annotation(_record(doc="fresh"))
            assert "fresh" in {r.doc_id for r in store.annotations()}


# --- bridge to annotation runs -------------------------------------------------------------


def test_store_runs_exposes_lww_submissions_per_labeler(tmp_path):
    path = tmp_path / "s.jsonl"
    with LogStore(path) as store:
        store.append_annotation(_record(doc="d1", labeler="A1", selected=("techcorp",)))
        store.append_annotation(_record(doc="d1", labeler="A1", selected=("globalsoft",)))
        store.append_annotation(_record(doc="d1", labeler="A2", selected=()))
        store.append_annotation(_record(doc="d2", labeler="A2", selected=("techcorp",)))
    runs = store_runs(path)
    assert [r.labeler_id for r in runs] == ["A1", "A2"]
    assert runs[0].labeler_kind == "human"
    assert runs[0].selections() == {"d1": frozenset({"globalsoft"})}
    assert runs[1].selections() == {
        "d1": frozenset(),
        "d2": frozenset({"techcorp"}),
    }
