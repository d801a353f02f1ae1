"""Pairwise agreement between labelers over shared document samples.

Positions are (document, entity) pairs drawn from each document's candidate
list plus anything a labeler selected; each labeler assigns a binary label
(selected or not). From those vectors we report per-document Jaccard overlap,
overall position-level agreement, and Cohen's kappa with marginals estimated
per labeler. Kappa is undefined (None) when chance agreement is exactly 1,
i.e. both labelers are the same constant; renderers show it as a dash.
"""

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .annotate import AnnotationRun
from .candidates import CandidateEntity
from .errors import CoverageError, InputError

KIND_HUMAN_HUMAN = "human-human"
KIND_HUMAN_MODEL = "human-model"
KIND_MODEL_MODEL = "model-model"

BLOCK_ORDER = (KIND_HUMAN_HUMAN, KIND_HUMAN_MODEL, KIND_MODEL_MODEL)

UNDEFINED_MARK = "—"


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Set overlap; two empty selections agree perfectly by convention."""
    set_a, set_b = set(a), set(b)
    if not set_a and not set_b:
        return 1.0
    return len(set_a & set_b) / len(set_a | set_b)


def overall_agreement(labels_a: Sequence[bool], labels_b: Sequence[bool]) -> float:
    if len(labels_a) != len(labels_b):
        raise InputError("label vectors differ in length")
    if not labels_a:
        raise InputError("cannot compute agreement over zero positions")
    return sum(x == y for x, y in zip(labels_a, labels_b)) / len(labels_a)


def cohens_kappa(labels_a: Sequence[bool], labels_b: Sequence[bool]) -> float | None:
    """Chance-corrected agreement; None when chance agreement is exactly 1."""
    if len(labels_a) != len(labels_b):
        raise InputError("label vectors differ in length")
    n = len(labels_a)
    if n == 0:
        raise InputError("cannot compute kappa over zero positions")
    p_o = sum(x == y for x, y in zip(labels_a, labels_b)) / n
    p_a = sum(labels_a) / n
    p_b = sum(labels_b) / n
    p_e = p_a * p_b + (1.0 - p_a) * (1.0 - p_b)
    if p_e == 1.0:
        return None
    return (p_o - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class PairAgreement:
    labeler_a: str
    labeler_b: str
    kind: str
    n_docs: int
    n_positions: int
    avg_jaccard: float
    overall: float
    kappa: float | None


@dataclass(frozen=True)
class AgreementReport:
    n_docs: int
    n_entities: int
    pairs: tuple[PairAgreement, ...]


def position_universe(
    doc_ids: Sequence[str],
    candidates_by_doc: Mapping[str, list[CandidateEntity]],
    selections: Sequence[Mapping[str, frozenset[str]]],
) -> dict[str, list[str]]:
    """Per-document entity keys: candidate order first, stray selections after."""
    universe: dict[str, list[str]] = {}
    for doc_id in doc_ids:
        keys = [c.canonical_key for c in candidates_by_doc.get(doc_id, [])]
        seen = set(keys)
        extras: set[str] = set()
        for sel in selections:
            extras |= sel.get(doc_id, frozenset()) - seen
        universe[doc_id] = keys + sorted(extras)
    return universe


def label_vector(
    doc_ids: Sequence[str],
    universe: Mapping[str, list[str]],
    selection: Mapping[str, frozenset[str]],
) -> list[bool]:
    return [key in selection[doc_id] for doc_id in doc_ids for key in universe[doc_id]]


def _require_coverage(label: str, doc_ids: Sequence[str], selection: Mapping[str, frozenset[str]]) -> None:
    missing = [d for d in doc_ids if d not in selection]
    if missing:
        raise CoverageError(
            f"labeler {label!r} has no successful annotation for: {', '.join(missing)}",
            missing,
        )


def pair_kind(kind_a: str, kind_b: str) -> str:
    if kind_a == "human" and kind_b == "human":
        return KIND_HUMAN_HUMAN
    if kind_a == "model" and kind_b == "model":
        return KIND_MODEL_MODEL
    return KIND_HUMAN_MODEL


def agreement_report(
    runs: Sequence[AnnotationRun],
    candidates_by_doc: Mapping[str, list[CandidateEntity]],
    doc_ids: Sequence[str],
) -> AgreementReport:
    """All pairwise agreement rows over a shared document sample.

    Every run must have a successful annotation for every sampled document;
    anything less raises CoverageError naming the gaps.
    """
    if len(runs) < 2:
        raise InputError("agreement needs at least two labelers")
    if not doc_ids:
        raise InputError("agreement needs a non-empty document sample")
    ids = [r.labeler_id for r in runs]
    if len(set(ids)) != len(ids):
        raise InputError("labeler ids must be distinct")

    selections = [run.selections() for run in runs]
    for run, sel in zip(runs, selections):
        _require_coverage(run.labeler_id, doc_ids, sel)

    universe = position_universe(doc_ids, candidates_by_doc, selections)
    n_entities = sum(len(universe[d]) for d in doc_ids)

    pairs = []
    for (run_a, sel_a), (run_b, sel_b) in combinations(zip(runs, selections), 2):
        vec_a = label_vector(doc_ids, universe, sel_a)
        vec_b = label_vector(doc_ids, universe, sel_b)
        per_doc = [jaccard(sel_a[d], sel_b[d]) for d in doc_ids]
        pairs.append(
            PairAgreement(
                labeler_a=run_a.labeler_id,
                labeler_b=run_b.labeler_id,
                kind=pair_kind(run_a.labeler_kind, run_b.labeler_kind),
                n_docs=len(doc_ids),
                n_positions=len(vec_a),
                avg_jaccard=math.fsum(per_doc) / len(per_doc),
                overall=overall_agreement(vec_a, vec_b),
                kappa=cohens_kappa(vec_a, vec_b),
            )
        )
    return AgreementReport(n_docs=len(doc_ids), n_entities=n_entities, pairs=tuple(pairs))


def _fmt(value: float | None) -> str:
    return UNDEFINED_MARK if value is None else f"{value:.3f}"


def render_agreement_table(report: AgreementReport) -> str:
    """Plain-text table grouped into human-human, human-model, model-model blocks."""
    width = max(
        [len("Pair")] + [len(f"{p.labeler_a} vs {p.labeler_b}") for p in report.pairs]
    )
    lines = [
        f"Agreement over {report.n_docs} documents, "
        f"{report.n_entities} total candidate entities.",
        "",
        f"{'Pair':<{width}}  {'Avg Jaccard':>11}  {'Overall':>7}  {'Kappa':>6}",
    ]
    for block in BLOCK_ORDER:
        rows = [p for p in report.pairs if p.kind == block]
        if not rows:
            continue
        lines.append(f"-- {block} --")
        for p in rows:
            pair_label = f"{p.labeler_a} vs {p.labeler_b}"
            lines.append(
                f"{pair_label:<{width}}  {p.avg_jaccard:>11.3f}  "
                f"{p.overall:>7.3f}  {_fmt(p.kappa):>6}"
            )
    return "\n".join(lines) + "\n"
