"""HTTP API for human annotation, backed by the append-only store.

The service owns one corpus (with precomputed candidate lists), one store
file, and optionally a set of model annotation runs plus a designated gold
run for live reports. Every annotator labels every document in corpus order.
Errors carry machine-readable codes in the response detail.
"""

from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .agreement import agreement_report, render_agreement_table
from .annotate import AnnotationRun
from .audit import DEFAULT_THRESHOLD, build_audit_queue, open_items
from .candidates import CandidateEntity, add_manual_entity, canonicalize
from .corpus import Document
from .errors import InputError, InvalidSurfaceError, StoreError
from .evaluation import compare_configs, derive_icl_pairing, render_eval_table
from .prompts import default_exemplars, load_guidelines
from .store import AnnotationRecord, LogStore, STATUS_SUBMITTED


def api_error(status_code: int, code: str, message: str, **extra) -> HTTPException:
    return HTTPException(status_code=status_code, detail={"code": code, "message": message, **extra})


@dataclass
class ServiceState:
    docs: list[Document]
    base_candidates: dict[str, list[CandidateEntity]]
    store: LogStore
    annotators: list[str]
    threshold: float = DEFAULT_THRESHOLD
    guidelines: str = ""
    model_runs: list[AnnotationRun] = field(default_factory=list)
    gold: AnnotationRun | None = None

    def __post_init__(self) -> None:
        self.doc_index = {doc.doc_id: doc for doc in self.docs}
        missing = [d.doc_id for d in self.docs if d.doc_id not in self.base_candidates]
        if missing:
            raise InputError(
                f"corpus lacks candidate lists for: {', '.join(missing[:5])}"
                + ("..." if len(missing) > 5 else "")
            )
        if not self.annotators:
            raise InputError("service needs at least one annotator id")

    # -- live candidate view ---------------------------------------------------

    def current_candidates(self, doc_id: str) -> list[CandidateEntity]:
        """Base candidates plus annotator additions replayed in store order."""
        cands = list(self.base_candidates[doc_id])
        for record in self.store.annotations():
            if record.doc_id != doc_id:
                continue
            for surface in record.added_entities:
                cands = add_manual_entity(cands, surface, record.labeler_id)
        return cands

    # -- report inputs ----------------------------------------------------------

    def human_runs(self) -> list[AnnotationRun]:
        from .annotate import ModelAnnotation

        by_labeler = self.store.annotations_by_labeler()
        runs = []
        for labeler_id in sorted(by_labeler):
            annotations = {}
            for doc_id in (d.doc_id for d in self.docs):
                record = by_labeler[labeler_id].get(doc_id)
                if record is None or record.status != STATUS_SUBMITTED:
                    continue
                valid_keys = {c.canonical_key for c in self.current_candidates(doc_id)}
                stray = record.selected - valid_keys
                if stray:
                    raise StoreError(
                        f"stored selection for {doc_id!r}/{labeler_id!r} references "
                        f"unknown keys: {', '.join(sorted(stray))}"
                    )
                annotations[doc_id] = ModelAnnotation(
                    doc_id=doc_id,
                    config_id=labeler_id,
                    selected=record.selected,
                    justification=record.rationale,
                )
            if annotations:
                runs.append(
                    AnnotationRun(
                        labeler_id=labeler_id,
                        labeler_kind="human",
                        role="human",
                        corpus_tag=self.docs[0].corpus_tag if self.docs else "",
                        config={},
                        annotations=annotations,
                    )
                )
        return runs

    def progress(self, annotator_id: str) -> dict:
        submitted = self.store.submitted_doc_ids(annotator_id)
        return {
            "annotator": annotator_id,
            "submitted": len(submitted & set(self.doc_index)),
            "total": len(self.docs),
        }


class AnnotationPayload(BaseModel):
    annotator_id: str
    doc_id: str
    selected: list[str] = []
    none_marker: bool = False
    select_all_marker: bool = False
    added_entities: list[str] = []
    rationale: str = ""


class ResolvePayload(BaseModel):
    note: str = ""


class CandidatePreviewPayload(BaseModel):
    doc_id: str
    surface: str


def _mention_json(doc: Document) -> list[dict]:
    return [
        {
            "surface": m.surface,
            "start": m.start,
            "end": m.end,
            "ner_type": m.ner_type,
            "provenance": m.provenance,
        }
        for m in doc.mentions
    ]


def _candidate_json(cands: list[CandidateEntity]) -> list[dict]:
    return [
        {
            "key": c.canonical_key,
            "display_name": c.display_name,
            "aliases": sorted(c.aliases),
            "provenance": c.provenance,
        }
        for c in cands
    ]


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="protagonist annotation service")
    # The UI may be served from a different origin during development.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def require_annotator(annotator_id: str, status_code: int = 404) -> None:
        if annotator_id not in state.annotators:
            raise api_error(status_code, "unknown_annotator", f"unknown annotator {annotator_id!r}")

    def require_document(doc_id: str, status_code: int = 404) -> Document:
        doc = state.doc_index.get(doc_id)
        if doc is None:
            raise api_error(status_code, "unknown_document", f"unknown document {doc_id!r}")
        return doc

    def task_payload(doc: Document, annotator_id: str) -> dict:
        return {
            "done": False,
            "doc_id": doc.doc_id,
            "headline": doc.headline,
            "text": doc.text,
            "mentions": _mention_json(doc),
            "candidates": _candidate_json(state.current_candidates(doc.doc_id)),
            "progress": state.progress(annotator_id),
        }

    @app.get("/api/guidelines")
    def get_guidelines() -> dict:
        examples = [
            {
                "excerpt": ex.excerpt,
                "candidate_names": list(ex.candidate_names),
                "gold": list(ex.gold),
                "rationale": ex.rationale,
                "kind": ex.kind,
            }
            for ex in default_exemplars()
        ]
        return {"text": state.guidelines or load_guidelines(), "examples": examples}

    @app.get("/api/annotators/{annotator_id}/next")
    def get_next(annotator_id: str) -> dict:
        require_annotator(annotator_id)
        submitted = state.store.submitted_doc_ids(annotator_id)
        for doc in state.docs:
            if doc.doc_id not in submitted:
                return task_payload(doc, annotator_id)
        return {"done": True, "progress": state.progress(annotator_id)}

    @app.get("/api/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        doc = require_document(doc_id)
        return {
            "doc_id": doc.doc_id,
            "headline": doc.headline,
            "text": doc.text,
            "corpus_tag": doc.corpus_tag,
            "mentions": _mention_json(doc),
            "candidates": _candidate_json(state.current_candidates(doc_id)),
        }

    @app.post("/api/annotations")
    def post_annotation(payload: AnnotationPayload) -> dict:
        require_annotator(payload.annotator_id, status_code=422)
        doc = require_document(payload.doc_id, status_code=422)
        if payload.none_marker and payload.select_all_marker:
            raise api_error(422, "marker_conflict", "none and select-all are mutually exclusive")
        if (payload.none_marker or payload.select_all_marker) and payload.selected:
            raise api_error(
                422, "marker_conflict", "markers are mutually exclusive with an explicit selection"
            )

        cands = state.current_candidates(doc.doc_id)
        outcomes: list[dict] = []
        for surface in payload.added_entities:
            events: list[dict] = []
            try:
                cands = add_manual_entity(cands, surface, payload.annotator_id, audit_log=events)
            except InvalidSurfaceError as exc:
                raise api_error(422, "invalid_surface", str(exc), surface=surface)
            outcomes.append(
                {
                    "surface": surface,
                    "canonical_key": events[-1]["canonical_key"],
                    "outcome": events[-1]["outcome"],
                }
            )

        valid_keys = {c.canonical_key for c in cands}
        if payload.none_marker:
            selected: set[str] = set()
        elif payload.select_all_marker:
            selected = set(valid_keys)
        else:
            unknown = [k for k in payload.selected if k not in valid_keys]
            if unknown:
                raise api_error(
                    422, "unknown_key", f"selection references unknown keys: {', '.join(unknown)}"
                )
            if not payload.selected:
                raise api_error(
                    422,
                    "empty_selection",
                    "an empty selection must be submitted via the none marker",
                )
            selected = set(payload.selected)

        record = AnnotationRecord(
            doc_id=doc.doc_id,
            labeler_id=payload.annotator_id,
            selected=frozenset(selected),
            added_entities=tuple(payload.added_entities),
            rationale=payload.rationale,
        )
        record_id = state.store.append_annotation(record)
        return {
            "record_id": record_id,
            "doc_id": doc.doc_id,
            "annotator_id": payload.annotator_id,
            "selected": sorted(selected),
            "added": outcomes,
            "progress": state.progress(payload.annotator_id),
        }

    @app.get("/api/annotations")
    def get_annotations(annotator: str = "", doc_id: str = "") -> dict:
        """Last-write-wins view of stored records, optionally filtered."""
        records = []
        for record in state.store.annotations():
            if annotator and record.labeler_id != annotator:
                continue
            if doc_id and record.doc_id != doc_id:
                continue
            records.append(
                {
                    "doc_id": record.doc_id,
                    "annotator_id": record.labeler_id,
                    "selected": sorted(record.selected),
                    "added_entities": list(record.added_entities),
                    "rationale": record.rationale,
                    "status": record.status,
                    "created_at": record.created_at,
                }
            )
        return {"records": records}

    @app.get("/api/progress")
    def get_progress(annotator: str) -> dict:
        require_annotator(annotator)
        return state.progress(annotator)

    def report_runs() -> tuple[list[AnnotationRun], list[str]]:
        runs = state.human_runs() + state.model_runs
        if len(runs) < 2:
            raise api_error(409, "not_ready", "agreement needs at least two labelers with records")
        sample = []
        for doc in state.docs:
            if all(doc.doc_id in run.selections() for run in runs):
                sample.append(doc.doc_id)
        if not sample:
            raise api_error(409, "not_ready", "no document labeled by every labeler yet")
        return runs, sample

    @app.get("/api/reports/agreement")
    def get_agreement_report() -> dict:
        runs, sample = report_runs()
        candidates_by_doc = {doc_id: state.current_candidates(doc_id) for doc_id in sample}
        report = agreement_report(runs, candidates_by_doc, sample)
        return {
            "n_docs": report.n_docs,
            "n_entities": report.n_entities,
            "pairs": [
                {
                    "labeler_a": p.labeler_a,
                    "labeler_b": p.labeler_b,
                    "kind": p.kind,
                    "avg_jaccard": p.avg_jaccard,
                    "overall": p.overall,
                    "kappa": p.kappa,
                }
                for p in report.pairs
            ],
            "table": render_agreement_table(report),
        }

    @app.get("/api/reports/eval")
    def get_eval_report() -> dict:
        if state.gold is None:
            raise api_error(409, "no_gold", "no gold run configured")
        if not state.model_runs:
            raise api_error(409, "not_ready", "no model runs configured")
        report = compare_configs(
            state.model_runs, state.gold, derive_icl_pairing(state.model_runs)
        )
        return {
            "gold_id": report.gold_id,
            "n_docs": report.n_docs,
            "macro_axis": report.macro_axis,
            "rows": [
                {
                    "config_id": r.config_id,
                    "label": r.label,
                    "dataset": r.dataset,
                    "mode": r.mode,
                    "micro_f1": r.micro_f1,
                    "macro_f1": r.macro_f1,
                    "delta_micro": r.delta_micro,
                    "delta_macro": r.delta_macro,
                }
                for r in report.rows
            ],
            "table": render_eval_table(report),
        }

    def current_audit_items() -> list:
        runs = state.human_runs() + state.model_runs
        doc_ids = [doc.doc_id for doc in state.docs]
        return build_audit_queue(runs, doc_ids, state.threshold)

    @app.get("/api/audit")
    def get_audit() -> dict:
        items = open_items(current_audit_items(), state.store.resolutions())
        return {
            "items": [
                {
                    "item_id": item.item_id,
                    "doc_id": item.doc_id,
                    "trigger": item.trigger,
                    "pair": list(item.pair),
                    "jaccard": item.jaccard,
                    "detail": item.detail,
                }
                for item in items
            ]
        }

    @app.post("/api/audit/{item_id}/resolve")
    def post_resolve(item_id: str, payload: ResolvePayload) -> dict:
        open_now = open_items(current_audit_items(), state.store.resolutions())
        if item_id not in {item.item_id for item in open_now}:
            raise api_error(404, "unknown_audit_item", f"no open audit item {item_id!r}")
        state.store.append_resolution(item_id, payload.note)
        return {"resolved": item_id, "note": payload.note}

    @app.post("/api/candidates/resolve")
    def post_candidate_preview(payload: CandidatePreviewPayload) -> dict:
        doc = require_document(payload.doc_id, status_code=422)
        try:
            key = canonicalize(payload.surface)
        except InvalidSurfaceError as exc:
            raise api_error(422, "invalid_surface", str(exc))
        existing = {
            c.canonical_key: c for c in state.current_candidates(doc.doc_id)
        }
        if key in existing:
            return {
                "canonical_key": key,
                "outcome": "merged",
                "display_name": existing[key].display_name,
            }
        return {"canonical_key": key, "outcome": "new", "display_name": payload.surface.strip()}

    return app
