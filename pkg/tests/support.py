"""Shared builders for test fixtures."""

from protag.annotate import AnnotationRun, ModelAnnotation
from protag.candidates import CandidateEntity


def run_from(
    labeler_id: str,
    selections: dict[str, set[str]],
    kind: str = "model",
    failed: tuple[str, ...] = (),
    unmatched: dict[str, list[str]] | None = None,
    config: dict | None = None,
    corpus_tag: str = "fix",
) -> AnnotationRun:
    unmatched = unmatched or {}
    annotations = {}
    for doc_id, sel in selections.items():
        annotations[doc_id] = ModelAnnotation(
            doc_id=doc_id,
            config_id=labeler_id,
            selected=frozenset(sel),
            unmatched_names=tuple(unmatched.get(doc_id, ())),
        )
    for doc_id in failed:
        annotations[doc_id] = ModelAnnotation(
            doc_id=doc_id,
            config_id=labeler_id,
            selected=frozenset(),
            status="failed",
            error="scripted failure",
        )
    return AnnotationRun(
        labeler_id=labeler_id,
        labeler_kind=kind,
        role="model",
        corpus_tag=corpus_tag,
        config=config or {},
        annotations=annotations,
    )


def cand(
    key: str, display: str | None = None, aliases: tuple[str, ...] = ()
) -> CandidateEntity:
    display = display or key.title()
    return CandidateEntity(
        canonical_key=key,
        display_name=display,
        aliases=set(aliases) or {display},
        mention_indices=[0],
    )
