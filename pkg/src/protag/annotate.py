"""Run a completion backend over a corpus and persist annotation runs.

An annotation run is one labeler's pass over a document set: for model runs
the labeler id is a fingerprint of (prompt spec, template, backend), so two
runs agree on identity exactly when nothing that shapes behavior changed.
Transient backend failures and malformed outputs are retried up to three
attempts, then recorded as failed annotations rather than silently dropped.
"""

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .backends import CompletionBackend
from .candidates import CandidateEntity
from .corpus import Document
from .errors import BackendError, CoverageError, InputError, ResponseParseError
from .files import atomic_write_text, read_jsonl, write_jsonl
from .prompts import (
    PromptSpec,
    PromptTemplate,
    WITH_CANDIDATES,
    build_prompt,
    default_template,
    parse_response,
)

MAX_ATTEMPTS = 3
BACKOFF_BASE_S = 0.5

STATUS_OK = "ok"
STATUS_FAILED = "failed"

RUN_KIND = "annotations"
ROLE_MODEL = "model"
ROLE_GOLD = "gold"


@dataclass(frozen=True)
class ModelAnnotation:
    doc_id: str
    config_id: str
    selected: frozenset[str]
    unmatched_names: tuple[str, ...] = ()
    justification: str = ""
    raw_response: str = ""
    status: str = STATUS_OK
    error: str = ""
    attempts: int = 1
    latency_ms: float = 0.0


def spec_summary(spec: PromptSpec, template: PromptTemplate) -> dict:
    return {
        "mode": spec.mode,
        "guidance": spec.guidance,
        "context": spec.context,
        "n_sentences": spec.n_sentences,
        "template_version": template.version,
        "n_exemplars": len(spec.exemplars),
        "temperature": spec.decoding.temperature,
        "max_output_tokens": spec.decoding.max_output_tokens,
    }


def config_fingerprint(spec: PromptSpec, template: PromptTemplate, backend_identity: str) -> str:
    """Stable id for (prompt spec, template, backend); 12 hex chars."""
    payload = {
        "spec": spec_summary(spec, template),
        "exemplars": [
            [ex.kind, ex.excerpt, list(ex.candidate_names), list(ex.gold), ex.rationale]
            for ex in spec.exemplars
        ],
        "template_sha": hashlib.sha256(template.body.encode("utf-8")).hexdigest(),
        "backend": backend_identity,
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def annotate_document(
    doc: Document,
    candidates: list[CandidateEntity],
    spec: PromptSpec,
    backend: CompletionBackend,
    template: PromptTemplate | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> ModelAnnotation:
    """Annotate one document; never raises on backend trouble, records it."""
    spec.validate()
    if template is None:
        template = default_template(spec.guidance)
    config_id = config_fingerprint(spec, template, backend.identity)

    if spec.guidance == WITH_CANDIDATES and not candidates:
        # Nothing to choose from: an empty selection, no backend call.
        return ModelAnnotation(
            doc_id=doc.doc_id,
            config_id=config_id,
            selected=frozenset(),
            justification="No candidate organizations in this document.",
            attempts=0,
        )

    prompt = build_prompt(doc, candidates, spec, template)
    started = time.monotonic()
    last_error = ""
    attempts = 0
    for attempt in range(1, MAX_ATTEMPTS + 1):
        attempts = attempt
        try:
            raw = backend.complete(prompt, spec.decoding)
        except BackendError as exc:
            last_error = f"backend failure: {exc}"
            if not exc.transient:
                break
            if attempt < MAX_ATTEMPTS:
                sleeper(BACKOFF_BASE_S * 2 ** (attempt - 1))
            continue
        try:
            selected, unmatched, justification = parse_response(raw, candidates, spec.guidance)
        except ResponseParseError as exc:
            last_error = f"parse failure: {exc}"
            continue
        return ModelAnnotation(
            doc_id=doc.doc_id,
            config_id=config_id,
            selected=frozenset(selected),
            unmatched_names=tuple(unmatched),
            justification=justification,
            raw_response=raw,
            attempts=attempts,
            latency_ms=(time.monotonic() - started) * 1000.0,
        )
    return ModelAnnotation(
        doc_id=doc.doc_id,
        config_id=config_id,
        selected=frozenset(),
        status=STATUS_FAILED,
        error=last_error,
        attempts=attempts,
        latency_ms=(time.monotonic() - started) * 1000.0,
    )


def annotate_corpus(
    docs: list[Document],
    candidates_by_doc: dict[str, list[CandidateEntity]],
    spec: PromptSpec,
    backend: CompletionBackend,
    parallelism: int = 1,
    template: PromptTemplate | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> tuple[list[ModelAnnotation], dict]:
    """Annotate every document; returns (annotations in input order, manifest).

    The manifest separates a `deterministic` section (safe to diff across
    reruns) from a `timing` section (wall-clock, excluded from idempotence).
    """
    spec.validate()
    if parallelism < 1:
        raise InputError("parallelism must be >= 1")
    if template is None:
        template = default_template(spec.guidance)
    missing = [d.doc_id for d in docs if d.doc_id not in candidates_by_doc]
    if missing:
        raise CoverageError(
            f"documents lack candidate lists: {', '.join(missing[:5])}"
            + ("..." if len(missing) > 5 else ""),
            missing,
        )

    started = time.monotonic()
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        annotations = list(
            pool.map(
                lambda doc: annotate_document(
                    doc, candidates_by_doc[doc.doc_id], spec, backend, template, sleeper
                ),
                docs,
            )
        )
    wall_s = time.monotonic() - started

    config_id = config_fingerprint(spec, template, backend.identity)
    n_failed = sum(1 for a in annotations if a.status == STATUS_FAILED)
    manifest = {
        "deterministic": {
            "kind": "run_manifest",
            "config_id": config_id,
            "backend": backend.identity,
            "spec": spec_summary(spec, template),
            "corpus_tag": docs[0].corpus_tag if docs else "",
            "n_docs": len(docs),
            "n_ok": len(docs) - n_failed,
            "n_failed": n_failed,
            "statuses": [[a.doc_id, a.status] for a in annotations],
        },
        "timing": {
            "wall_time_s": wall_s,
            "latency_ms": {a.doc_id: round(a.latency_ms, 3) for a in annotations},
        },
    }
    return annotations, manifest


def write_manifest(path: str | Path, manifest: dict) -> None:
    atomic_write_text(path, json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")


# --- annotation run files ----------------------------------------------------


@dataclass
class AnnotationRun:
    """One labeler's annotations over a document set, as loaded from disk."""

    labeler_id: str
    labeler_kind: str  # "human" | "model"
    role: str  # "model" | "gold" | "human"
    corpus_tag: str
    config: dict
    annotations: dict[str, ModelAnnotation]

    def selections(self) -> dict[str, frozenset[str]]:
        """doc_id -> selected keys, successful annotations only."""
        return {
            doc_id: ann.selected
            for doc_id, ann in self.annotations.items()
            if ann.status != STATUS_FAILED
        }

    def failed_doc_ids(self) -> list[str]:
        return [d for d, a in self.annotations.items() if a.status == STATUS_FAILED]


def write_annotation_run(
    path: str | Path,
    annotations: list[ModelAnnotation],
    *,
    labeler_kind: str = "model",
    role: str = ROLE_MODEL,
    corpus_tag: str = "",
    config: dict | None = None,
) -> None:
    if not annotations:
        raise InputError("refusing to write an empty annotation run")
    labeler_id = annotations[0].config_id
    header = {
        "kind": RUN_KIND,
        "labeler_id": labeler_id,
        "labeler_kind": labeler_kind,
        "role": role,
        "corpus_tag": corpus_tag,
        "config": config or {},
    }
    records = (
        {
            "doc_id": a.doc_id,
            "selected": sorted(a.selected),
            "unmatched": list(a.unmatched_names),
            "justification": a.justification,
            "raw_response": a.raw_response,
            "status": a.status,
            "error": a.error,
            "attempts": a.attempts,
        }
        for a in annotations
    )
    write_jsonl(path, header, records)


def read_annotation_run(path: str | Path) -> AnnotationRun:
    header, records = read_jsonl(path, expect_kind=RUN_KIND)
    labeler_id = header["labeler_id"]
    annotations: dict[str, ModelAnnotation] = {}
    for rec in records:
        ann = ModelAnnotation(
            doc_id=rec["doc_id"],
            config_id=labeler_id,
            selected=frozenset(rec["selected"]),
            unmatched_names=tuple(rec.get("unmatched", ())),
            justification=rec.get("justification", ""),
            raw_response=rec.get("raw_response", ""),
            status=rec.get("status", STATUS_OK),
            error=rec.get("error", ""),
            attempts=rec.get("attempts", 1),
        )
        if ann.doc_id in annotations:
            raise InputError(f"{path}: duplicate annotation for doc {ann.doc_id!r}")
        annotations[ann.doc_id] = ann
    return AnnotationRun(
        labeler_id=labeler_id,
        labeler_kind=header.get("labeler_kind", "model"),
        role=header.get("role", ROLE_MODEL),
        corpus_tag=header.get("corpus_tag", ""),
        config=header.get("config", {}),
        annotations=annotations,
    )
