"""Append-only JSONL store for human annotations and audit resolutions.

One writer appends full JSON lines (flush + fsync per record); readers see a
last-write-wins view keyed by (doc_id, labeler_id). Recovery after a crash
re-reads the log: a torn trailing line (no newline, invalid JSON) is truncated
with a warning, while corruption anywhere earlier is refused outright because
it cannot be explained by an interrupted append.
"""

import json
import logging
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterator

from .errors import InputError, StoreCorruptError
from .files import SCHEMA_VERSION, dump_record

log = logging.getLogger(__name__)

STORE_KIND = "store"
KIND_ANNOTATION = "annotation"
KIND_RESOLUTION = "audit_resolution"

STATUS_SUBMITTED = "submitted"
STATUS_FAILED = "failed"
RECORD_STATUSES = (STATUS_SUBMITTED, STATUS_FAILED)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class AnnotationRecord:
    doc_id: str
    labeler_id: str
    selected: frozenset[str]
    added_entities: tuple[str, ...] = ()
    rationale: str = ""
    created_at: str = ""
    status: str = STATUS_SUBMITTED

    def validate(self) -> None:
        if not self.doc_id:
            raise InputError("annotation record needs a doc_id")
        if not self.labeler_id:
            raise InputError("annotation record needs a labeler_id")
        if self.status not in RECORD_STATUSES:
            raise InputError(f"unknown record status {self.status!r}")
        if any(not key for key in self.selected):
            raise InputError("selected keys must be non-empty strings")


def _record_to_json(record: AnnotationRecord) -> dict:
    return {
        "kind": KIND_ANNOTATION,
        "doc_id": record.doc_id,
        "labeler_id": record.labeler_id,
        "selected": sorted(record.selected),
        "added_entities": list(record.added_entities),
        "rationale": record.rationale,
        "created_at": record.created_at,
        "status": record.status,
    }


def _record_from_json(obj: dict) -> AnnotationRecord:
    return AnnotationRecord(
        doc_id=obj["doc_id"],
        labeler_id=obj["labeler_id"],
        selected=frozenset(obj.get("selected", ())),
        added_entities=tuple(obj.get("added_entities", ())),
        rationale=obj.get("rationale", ""),
        created_at=obj.get("created_at", ""),
        status=obj.get("status", STATUS_SUBMITTED),
    )


class LogStore:
    """Durable annotation log with an in-memory last-write-wins index."""

    def __init__(self, path: str | Path, clock: Callable[[], str] = _utc_now):
        self._path = Path(path)
        self._clock = clock
        self._lock = threading.Lock()
        # (doc_id, labeler_id) -> (append ordinal, record)
        self._annotations: dict[tuple[str, str], tuple[int, AnnotationRecord]] = {}
        # audit item id -> resolution note
        self._resolutions: dict[str, dict] = {}
        self._ordinal = 0
        self._recover()
        self._handle = open(self._path, "ab")

    # -- recovery ------------------------------------------------------------

    def _recover(self) -> None:
        if not self._path.exists() or self._path.stat().st_size == 0:
            header = dump_record({"schema_version": SCHEMA_VERSION, "kind": STORE_KIND})
            self._path.write_bytes(header.encode("utf-8") + b"\n")
            return
        raw = self._path.read_bytes()
        lines = raw.split(b"\n")
        complete, tail = lines[:-1], lines[-1]
        keep_bytes = len(raw) - len(tail)
        parsed: list[dict] = []
        for i, line in enumerate(complete):
            try:
                parsed.append(json.loads(line.decode("utf-8")))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise StoreCorruptError(
                    f"{self._path}: record {i + 1} is corrupt mid-file: {exc}"
                ) from exc
        if tail:
            # A torn final append: keep it only if the whole JSON object made
            # it to disk, otherwise drop the unacknowledged partial line.
            try:
                parsed.append(json.loads(tail.decode("utf-8")))
                keep_bytes = len(raw)
                with open(self._path, "ab") as fh:
                    fh.write(b"\n")
            except (UnicodeDecodeError, json.JSONDecodeError):
                log.warning(
                    "%s: truncating %d bytes of torn trailing record", self._path, len(tail)
                )
                with open(self._path, "r+b") as fh:
                    fh.truncate(keep_bytes)
        if not parsed:
            header = dump_record({"schema_version": SCHEMA_VERSION, "kind": STORE_KIND})
            self._path.write_bytes(header.encode("utf-8") + b"\n")
            return
        head = parsed[0]
        if head.get("kind") != STORE_KIND:
            raise StoreCorruptError(f"{self._path}: not a store file (kind={head.get('kind')!r})")
        if head.get("schema_version") != SCHEMA_VERSION:
            raise StoreCorruptError(
                f"{self._path}: unsupported schema version {head.get('schema_version')!r}"
            )
        for obj in parsed[1:]:
            self._apply(obj)

    def _apply(self, obj: dict) -> int:
        self._ordinal += 1
        kind = obj.get("kind")
        if kind == KIND_ANNOTATION:
            record = _record_from_json(obj)
            self._annotations[(record.doc_id, record.labeler_id)] = (self._ordinal, record)
        elif kind == KIND_RESOLUTION:
            self._resolutions[obj["item_id"]] = {
                "note": obj.get("note", ""),
                "created_at": obj.get("created_at", ""),
            }
        else:
            raise StoreCorruptError(f"{self._path}: unknown record kind {kind!r}")
        return self._ordinal

    # -- writes --------------------------------------------------------------

    def _append_line(self, obj: dict) -> None:
        self._handle.write(dump_record(obj).encode("utf-8") + b"\n")
        self._handle.flush()
        os.fsync(self._handle.fileno())

    def append_annotation(self, record: AnnotationRecord) -> int:
        """Validate, persist, index; returns the record's append ordinal."""
        record.validate()
        if not record.created_at:
            record = AnnotationRecord(
                doc_id=record.doc_id,
                labeler_id=record.labeler_id,
                selected=record.selected,
                added_entities=record.added_entities,
                rationale=record.rationale,
                created_at=self._clock(),
                status=record.status,
            )
        obj = _record_to_json(record)
        with self._lock:
            self._append_line(obj)
            return self._apply(obj)

    def append_resolution(self, item_id: str, note: str) -> int:
        if not item_id:
            raise InputError("audit resolution needs an item id")
        obj = {
            "kind": KIND_RESOLUTION,
            "item_id": item_id,
            "note": note,
            "created_at": self._clock(),
        }
        with self._lock:
            self._append_line(obj)
            return self._apply(obj)

    # -- reads ---------------------------------------------------------------

    def annotations(self) -> list[AnnotationRecord]:
        """Last-write-wins view, ordered by the surviving append's position."""
        with self._lock:
            pairs = sorted(self._annotations.values(), key=lambda item: item[0])
        return [record for _, record in pairs]

    def annotations_by_labeler(self) -> dict[str, dict[str, AnnotationRecord]]:
        """labeler_id -> doc_id -> record (LWW view)."""
        view: dict[str, dict[str, AnnotationRecord]] = {}
        for record in self.annotations():
            view.setdefault(record.labeler_id, {})[record.doc_id] = record
        return view

    def resolutions(self) -> dict[str, dict]:
        with self._lock:
            return dict(self._resolutions)

    def submitted_doc_ids(self, labeler_id: str) -> set[str]:
        return {
            r.doc_id
            for r in self.annotations()
            if r.labeler_id == labeler_id and r.status == STATUS_SUBMITTED
        }

    def scan(self, kind: str | None = None) -> Iterator[dict]:
        """Replay every committed record (no supersession), oldest first."""
        with self._lock:
            self._handle.flush()
            raw = self._path.read_bytes()
        for i, line in enumerate(raw.split(b"\n")):
            if not line:
                continue
            obj = json.loads(line.decode("utf-8"))
            if i == 0:
                continue
            if kind is None or obj.get("kind") == kind:
                yield obj

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> "LogStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def store_runs(path: str | Path) -> list["AnnotationRun"]:
    """Expose each human labeler's submitted records as an annotation run."""
    from .annotate import AnnotationRun, ModelAnnotation, STATUS_OK

    with LogStore(path) as store:
        by_labeler = store.annotations_by_labeler()
    runs = []
    for labeler_id in sorted(by_labeler):
        annotations = {}
        for doc_id, record in sorted(by_labeler[labeler_id].items()):
            annotations[doc_id] = ModelAnnotation(
                doc_id=doc_id,
                config_id=labeler_id,
                selected=record.selected,
                justification=record.rationale,
                status=STATUS_OK if record.status == STATUS_SUBMITTED else record.status,
            )
        runs.append(
            AnnotationRun(
                labeler_id=labeler_id,
                labeler_kind="human",
                role="human",
                corpus_tag="",
                config={},
                annotations=annotations,
            )
        )
    return runs
