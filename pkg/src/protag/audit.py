"""Targeted audit queue: low-overlap documents and failed annotations.

An item flags one document for one labeler pair whose selection overlap fell
strictly below the threshold, or one failed annotation. Item ids hash the
triggering content, so resolving an item keeps it resolved until the
underlying selections actually change.
"""

import hashlib
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .annotate import AnnotationRun
from .agreement import jaccard
from .errors import InputError

TRIGGER_PAIRWISE = "pairwise_disagreement"
TRIGGER_MODEL_HUMAN = "model_human_disagreement"
TRIGGER_PARSE_FAILURE = "parse_failure"

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class AuditItem:
    item_id: str
    doc_id: str
    trigger: str
    pair: tuple[str, ...]
    jaccard: float | None
    detail: str


def _item_id(*parts: str) -> str:
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()[:12]


def _disagreement_trigger(kind_a: str, kind_b: str) -> str:
    if {kind_a, kind_b} == {"human", "model"}:
        return TRIGGER_MODEL_HUMAN
    return TRIGGER_PAIRWISE


def build_audit_queue(
    runs: Sequence[AnnotationRun],
    doc_ids: Sequence[str],
    threshold: float = DEFAULT_THRESHOLD,
) -> list[AuditItem]:
    """Audit items over a document sample; order is deterministic.

    For each labeler pair, a document they both labeled successfully gets an
    item when its Jaccard overlap is strictly below `threshold`. Every failed
    annotation yields a parse_failure item regardless of thresholds.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InputError("audit threshold must lie in [0, 1]")
    selections = {run.labeler_id: run.selections() for run in runs}
    items: list[AuditItem] = []
    for doc_id in doc_ids:
        for run_a, run_b in combinations(runs, 2):
            sel_a = selections[run_a.labeler_id].get(doc_id)
            sel_b = selections[run_b.labeler_id].get(doc_id)
            if sel_a is None or sel_b is None:
                continue
            overlap = jaccard(sel_a, sel_b)
            if overlap >= threshold:
                continue
            trigger = _disagreement_trigger(run_a.labeler_kind, run_b.labeler_kind)
            items.append(
                AuditItem(
                    item_id=_item_id(
                        doc_id,
                        trigger,
                        run_a.labeler_id,
                        run_b.labeler_id,
                        ",".join(sorted(sel_a)),
                        ",".join(sorted(sel_b)),
                    ),
                    doc_id=doc_id,
                    trigger=trigger,
                    pair=(run_a.labeler_id, run_b.labeler_id),
                    jaccard=overlap,
                    detail=(
                        f"{run_a.labeler_id} selected {sorted(sel_a) or '[]'}, "
                        f"{run_b.labeler_id} selected {sorted(sel_b) or '[]'}"
                    ),
                )
            )
        for run in runs:
            ann = run.annotations.get(doc_id)
            if ann is None or ann.status != "failed":
                continue
            items.append(
                AuditItem(
                    item_id=_item_id(doc_id, TRIGGER_PARSE_FAILURE, run.labeler_id, ann.error),
                    doc_id=doc_id,
                    trigger=TRIGGER_PARSE_FAILURE,
                    pair=(run.labeler_id,),
                    jaccard=None,
                    detail=ann.error or "annotation failed",
                )
            )
    return items


def open_items(
    items: Sequence[AuditItem], resolutions: Mapping[str, dict]
) -> list[AuditItem]:
    return [item for item in items if item.item_id not in resolutions]
