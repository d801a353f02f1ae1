"""Entity-level scoring of annotation runs against a designated gold run.

Counts are pooled per document from canonical-key sets. Free-text predictions
that failed candidate matching count as false positives: the run asserted an
organization the document's candidate inventory cannot ground. Micro F1 pools
counts over all documents; macro F1 is the unweighted per-document mean, with
degenerate cases pinned so an empty-gold, empty-prediction document scores 1.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .annotate import AnnotationRun
from .errors import CoverageError, InputError

MACRO_AXIS = "per_document"

PAIRING_FIELDS = (
    "backend",
    "guidance",
    "context",
    "n_sentences",
    "template_version",
    "temperature",
    "max_output_tokens",
)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int = 0  # diagnostics only, never enters F1

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


def confusion(
    gold: Iterable[str],
    pred: Iterable[str],
    unmatched: Sequence[str] = (),
    universe_size: int | None = None,
) -> ConfusionCounts:
    """Per-document counts; unmatched free-text names are false positives."""
    gold_set, pred_set = set(gold), set(pred)
    tp = len(gold_set & pred_set)
    fp = len(pred_set - gold_set) + len(unmatched)
    fn = len(gold_set - pred_set)
    tn = 0
    if universe_size is not None:
        tn = max(universe_size - len(gold_set | pred_set), 0)
    return ConfusionCounts(tp, fp, fn, tn)


def f1_from_counts(counts: ConfusionCounts) -> float:
    """F1 with pinned degenerate cases: nothing to find and nothing found is 1."""
    if counts.tp + counts.fp + counts.fn == 0:
        return 1.0
    precision = 1.0 if counts.tp + counts.fp == 0 else counts.tp / (counts.tp + counts.fp)
    recall = 1.0 if counts.tp + counts.fn == 0 else counts.tp / (counts.tp + counts.fn)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def micro_f1(counts: Iterable[ConfusionCounts]) -> float:
    pooled = ConfusionCounts(0, 0, 0)
    n = 0
    for c in counts:
        pooled = pooled + c
        n += 1
    if n == 0:
        raise InputError("micro F1 needs at least one scored document")
    return f1_from_counts(pooled)


def macro_f1(doc_f1s: Sequence[float]) -> float:
    if not doc_f1s:
        raise InputError("macro F1 needs at least one scored document")
    # fsum is exactly rounded, so the mean is permutation-invariant.
    return math.fsum(doc_f1s) / len(doc_f1s)


@dataclass(frozen=True)
class RunScore:
    micro_f1: float
    macro_f1: float
    per_doc: dict[str, ConfusionCounts]


def score_run(run: AnnotationRun, gold: AnnotationRun) -> RunScore:
    """Score one run against gold over gold's document set.

    Gold must be fully successful; the scored run must cover every gold
    document with a successful annotation (a failed annotation is a missing
    label, not an empty one).
    """
    gold_failed = gold.failed_doc_ids()
    if gold_failed:
        raise InputError(
            f"gold run {gold.labeler_id!r} has failed annotations for: {', '.join(gold_failed)}"
        )
    doc_ids = list(gold.annotations)
    if not doc_ids:
        raise InputError("gold run is empty")
    selections = run.selections()
    missing = [d for d in doc_ids if d not in selections]
    if missing:
        raise CoverageError(
            f"run {run.labeler_id!r} lacks successful annotations for: {', '.join(missing)}",
            missing,
        )
    per_doc = {}
    for doc_id in doc_ids:
        ann = run.annotations[doc_id]
        per_doc[doc_id] = confusion(
            gold.annotations[doc_id].selected, ann.selected, ann.unmatched_names
        )
    doc_f1s = [f1_from_counts(per_doc[d]) for d in doc_ids]
    return RunScore(
        micro_f1=micro_f1(per_doc.values()),
        macro_f1=macro_f1(doc_f1s),
        per_doc=per_doc,
    )


@dataclass(frozen=True)
class EvalRow:
    config_id: str
    label: str
    dataset: str
    mode: str
    micro_f1: float
    macro_f1: float
    delta_micro: float | None = None
    delta_macro: float | None = None


@dataclass(frozen=True)
class EvalReport:
    gold_id: str
    n_docs: int
    macro_axis: str
    rows: tuple[EvalRow, ...]


def _run_label(run: AnnotationRun) -> str:
    cfg = run.config
    backend = cfg.get("backend", run.labeler_id)
    mode = cfg.get("mode", "?")
    guidance = cfg.get("guidance", "?")
    context = cfg.get("context", "?")
    return f"{backend} [{mode}/{guidance}/{context}]"


def derive_icl_pairing(runs: Sequence[AnnotationRun]) -> dict[str, str]:
    """Match each ICL run to the base run differing only in exemplar use."""
    pairing: dict[str, str] = {}
    for run in runs:
        if run.config.get("mode") != "icl":
            continue
        want = tuple(run.config.get(f) for f in PAIRING_FIELDS)
        matches = [
            other.labeler_id
            for other in runs
            if other.config.get("mode") == "base"
            and tuple(other.config.get(f) for f in PAIRING_FIELDS) == want
        ]
        if len(matches) > 1:
            raise InputError(
                f"run {run.labeler_id!r} has multiple matching baselines: {', '.join(matches)}"
            )
        if matches:
            pairing[run.labeler_id] = matches[0]
    return pairing


def compare_configs(
    runs: Sequence[AnnotationRun],
    gold: AnnotationRun,
    pairing: Mapping[str, str] | None = None,
) -> EvalReport:
    """Score every run against gold; paired ICL rows carry exact deltas."""
    if not runs:
        raise InputError("no runs to evaluate")
    ids = [r.labeler_id for r in runs]
    if len(set(ids)) != len(ids):
        raise InputError("run config ids must be distinct")
    if pairing is None:
        pairing = {}
    by_id = {r.labeler_id: r for r in runs}
    for icl_id, base_id in pairing.items():
        if icl_id not in by_id or base_id not in by_id:
            raise InputError(f"pairing references unknown run: {icl_id} -> {base_id}")

    scores = {r.labeler_id: score_run(r, gold) for r in runs}
    rows = []
    for run in runs:
        score = scores[run.labeler_id]
        delta_micro = delta_macro = None
        base_id = pairing.get(run.labeler_id)
        if base_id is not None:
            base = scores[base_id]
            delta_micro = score.micro_f1 - base.micro_f1
            delta_macro = score.macro_f1 - base.macro_f1
        rows.append(
            EvalRow(
                config_id=run.labeler_id,
                label=_run_label(run),
                dataset=run.corpus_tag,
                mode=run.config.get("mode", "?"),
                micro_f1=score.micro_f1,
                macro_f1=score.macro_f1,
                delta_micro=delta_micro,
                delta_macro=delta_macro,
            )
        )
    return EvalReport(
        gold_id=gold.labeler_id,
        n_docs=len(gold.annotations),
        macro_axis=MACRO_AXIS,
        rows=tuple(rows),
    )


def _cell(value: float, delta: float | None) -> str:
    text = f"{value:.3f}"
    if delta is not None:
        text += f" ({delta:+.3f})"
    return text


def render_eval_table(report: EvalReport) -> str:
    """Aligned plain-text comparison; deltas always carry an explicit sign."""
    header = (
        f"Evaluation against gold {report.gold_id!r} over {report.n_docs} documents "
        f"(macro={report.macro_axis})."
    )
    label_w = max([len("Config")] + [len(r.label) for r in report.rows])
    ds_w = max([len("Dataset")] + [len(r.dataset) for r in report.rows])
    micro_cells = [_cell(r.micro_f1, r.delta_micro) for r in report.rows]
    macro_cells = [_cell(r.macro_f1, r.delta_macro) for r in report.rows]
    micro_w = max([len("Micro-F1")] + [len(c) for c in micro_cells])
    macro_w = max([len("Macro-F1")] + [len(c) for c in macro_cells])
    lines = [
        header,
        "",
        f"{'Config':<{label_w}}  {'Dataset':<{ds_w}}  "
        f"{'Micro-F1':>{micro_w}}  {'Macro-F1':>{macro_w}}",
    ]
    for row, micro_cell, macro_cell in zip(report.rows, micro_cells, macro_cells):
        lines.append(
            f"{row.label:<{label_w}}  {row.dataset:<{ds_w}}  "
            f"{micro_cell:>{micro_w}}  {macro_cell:>{macro_w}}"
        )
    return "\n".join(lines) + "\n"
