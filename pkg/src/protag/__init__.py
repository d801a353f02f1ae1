"""Protagonist-organization annotation platform.

Pipeline: ingest news corpora (CoNLL BIO or JSONL), extract candidate
organizations per document, collect protagonist selections from completion
backends and from humans (HTTP service + append-only store), then report
pairwise agreement and entity-level F1 against a designated gold run.
"""

from .agreement import (
    AgreementReport,
    PairAgreement,
    agreement_report,
    cohens_kappa,
    jaccard,
    overall_agreement,
    render_agreement_table,
)
from .annotate import (
    AnnotationRun,
    ModelAnnotation,
    annotate_corpus,
    annotate_document,
    config_fingerprint,
    read_annotation_run,
    write_annotation_run,
)
from .audit import AuditItem, build_audit_queue, open_items
from .backends import CompletionBackend, HttpBackend, MockBackend, make_backend
from .candidates import (
    CandidateEntity,
    add_manual_entity,
    canonicalize,
    extract_candidates,
    match_free_text,
)
from .corpus import (
    Document,
    EntityMention,
    parse_conll,
    parse_jsonl,
    read_corpus,
    write_corpus,
)
from .errors import (
    BackendError,
    CoverageError,
    InputError,
    ProtagError,
    ResponseParseError,
    RuntimeFailure,
)
from .evaluation import (
    ConfusionCounts,
    EvalReport,
    EvalRow,
    compare_configs,
    confusion,
    f1_from_counts,
    macro_f1,
    micro_f1,
    render_eval_table,
    score_run,
)
from .prompts import (
    Decoding,
    Exemplar,
    PromptSpec,
    PromptTemplate,
    build_prompt,
    format_selection,
    parse_response,
)
from .store import AnnotationRecord, LogStore, store_runs

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "AnnotationRecord",
    "AnnotationRun",
    "AuditItem",
    "BackendError",
    "CandidateEntity",
    "CompletionBackend",
    "ConfusionCounts",
    "CoverageError",
    "Decoding",
    "Document",
    "EntityMention",
    "EvalReport",
    "EvalRow",
    "Exemplar",
    "HttpBackend",
    "InputError",
    "LogStore",
    "MockBackend",
    "ModelAnnotation",
    "PairAgreement",
    "PromptSpec",
    "PromptTemplate",
    "ProtagError",
    "ResponseParseError",
    "RuntimeFailure",
    "add_manual_entity",
    "agreement_report",
    "annotate_corpus",
    "annotate_document",
    "build_audit_queue",
    "build_prompt",
    "canonicalize",
    "cohens_kappa",
    "compare_configs",
    "config_fingerprint",
    "confusion",
    "extract_candidates",
    "f1_from_counts",
    "format_selection",
    "jaccard",
    "macro_f1",
    "make_backend",
    "match_free_text",
    "micro_f1",
    "open_items",
    "overall_agreement",
    "parse_conll",
    "parse_jsonl",
    "parse_response",
    "read_annotation_run",
    "read_corpus",
    "render_agreement_table",
    "render_eval_table",
    "score_run",
    "store_runs",
    "write_annotation_run",
    "write_corpus",
]
