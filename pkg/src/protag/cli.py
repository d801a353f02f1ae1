"""Command-line entry point orchestrating the full pipeline.

Exit codes: 0 success, 1 invalid input (bad flags, malformed files, coverage
gaps), 2 runtime failure (backend or store trouble). All outputs are written
atomically; logs go to stderr, data only to files.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .agreement import agreement_report, render_agreement_table
from .annotate import (
    annotate_corpus,
    read_annotation_run,
    spec_summary,
    write_annotation_run,
    write_manifest,
)
from .backends import make_backend
from .candidates import extract_candidates
from .corpus import parse_conll, parse_jsonl, read_corpus, write_corpus
from .errors import CoverageError, InputError, ProtagError, RuntimeFailure
from .evaluation import compare_configs, derive_icl_pairing, render_eval_table
from .files import SCHEMA_VERSION, atomic_write_text, peek_kind
from .fixtures import fixture_corpus, render_conll_source, render_jsonl_source
from .prompts import (
    CONTEXT_FULL,
    CONTEXT_REDUCED,
    Decoding,
    MODE_ICL,
    NO_CANDIDATES,
    PromptSpec,
    WITH_CANDIDATES,
    default_exemplars,
    default_template,
    load_exemplars,
    load_template,
)
from .store import store_runs

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Flag errors are validation errors (exit 1), not argparse's exit 2."""

    def error(self, message: str):
        raise InputError(message)


def _parse_context(value: str) -> tuple[str, int]:
    if value == "full":
        return CONTEXT_FULL, 0
    if value.startswith("reduced:"):
        raw = value[len("reduced:") :]
        try:
            n = int(raw)
        except ValueError:
            raise InputError(f"--context reduced:N needs an integer, got {raw!r}")
        if n < 1:
            raise InputError("--context reduced:N requires N >= 1")
        return CONTEXT_REDUCED, n
    raise InputError(f"--context must be 'full' or 'reduced:N', got {value!r}")


def _write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


# --- subcommands -----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    source = Path(args.input)
    if not source.exists():
        raise InputError(f"input file not found: {source}")
    text = source.read_text(encoding="utf-8")
    tag = args.corpus_tag or args.format
    if args.format == "conll":
        docs = parse_conll(text, corpus_tag=tag)
    else:
        docs = parse_jsonl(text, corpus_tag=tag)
    if not docs:
        raise InputError(f"{source}: no documents found")
    write_corpus(docs, args.out)
    log.info("ingested %d documents from %s into %s", len(docs), source, args.out)
    return 0


def cmd_candidates(args: argparse.Namespace) -> int:
    docs, _ = read_corpus(args.corpus)
    candidates_by_doc = {doc.doc_id: extract_candidates(doc) for doc in docs}
    write_corpus(docs, args.out, candidates_by_doc=candidates_by_doc)
    n = sum(len(c) for c in candidates_by_doc.values())
    log.info("extracted %d candidates over %d documents into %s", n, len(docs), args.out)
    return 0


def cmd_annotate(args: argparse.Namespace) -> int:
    docs, candidates_by_doc = read_corpus(args.corpus)
    if candidates_by_doc is None:
        raise InputError(
            f"{args.corpus}: corpus has no candidate lists; run the candidates step first"
        )
    if not docs:
        raise InputError(f"{args.corpus}: corpus is empty")

    guidance = WITH_CANDIDATES if args.guidance == "with" else NO_CANDIDATES
    context, n_sentences = _parse_context(args.context)
    exemplars = ()
    if args.mode == MODE_ICL:
        exemplars = load_exemplars(args.exemplars) if args.exemplars else default_exemplars()
    template = load_template(args.template) if args.template else default_template(guidance)
    spec = PromptSpec(
        mode=args.mode,
        guidance=guidance,
        context=context,
        n_sentences=n_sentences,
        exemplars=exemplars,
        template_version=template.version,
        decoding=Decoding(max_output_tokens=args.max_output_tokens),
    )
    spec.validate()
    backend = make_backend(args.backend, timeout=args.timeout, model=args.model)

    annotations, manifest = annotate_corpus(
        docs, candidates_by_doc, spec, backend, parallelism=args.parallelism, template=template
    )
    config = {**spec_summary(spec, template), "backend": backend.identity}
    write_annotation_run(
        args.out,
        annotations,
        labeler_kind="model",
        role=args.role,
        corpus_tag=docs[0].corpus_tag,
        config=config,
    )
    write_manifest(f"{args.out}.manifest.json", manifest)
    det = manifest["deterministic"]
    log.info(
        "annotated %d documents (%d failed) as config %s; run written to %s",
        det["n_docs"],
        det["n_failed"],
        det["config_id"],
        args.out,
    )
    if det["n_failed"]:
        failed = [doc_id for doc_id, status in det["statuses"] if status == "failed"]
        log.warning("failed documents: %s", ", ".join(failed))
    return 0


def _load_runs(paths: list[str]) -> list:
    """Annotation-run files load as one run each; store files expand per labeler."""
    runs = []
    for path in paths:
        kind = peek_kind(path)
        if kind == "store":
            expanded = store_runs(path)
            if not expanded:
                raise InputError(f"{path}: store holds no annotations")
            runs.extend(expanded)
        else:
            runs.append(read_annotation_run(path))
    seen: set[str] = set()
    for run in runs:
        if run.labeler_id in seen:
            raise InputError(f"duplicate labeler id {run.labeler_id!r} across inputs")
        seen.add(run.labeler_id)
    return runs


def _parse_pairs(value: str) -> set[frozenset[str]] | None:
    if value == "all":
        return None
    pairs = set()
    for chunk in value.split(","):
        parts = chunk.split(":")
        if len(parts) != 2 or not parts[0] or not parts[1] or parts[0] == parts[1]:
            raise InputError(f"--pairs entries must look like A:B, got {chunk!r}")
        pairs.add(frozenset(parts))
    return pairs


def cmd_agree(args: argparse.Namespace) -> int:
    runs = _load_runs(args.annotations)
    wanted = _parse_pairs(args.pairs)
    if wanted is not None:
        known = {r.labeler_id for r in runs}
        named = set().union(*wanted)
        unknown = sorted(named - known)
        if unknown:
            raise InputError(f"--pairs names unknown labelers: {', '.join(unknown)}")
        runs = [r for r in runs if r.labeler_id in named]
    if len(runs) < 2:
        raise InputError("agreement needs at least two labelers")

    docs, candidates_by_doc = read_corpus(args.corpus)
    corpus_ids = {d.doc_id for d in docs}
    covered = set()
    for run in runs:
        run_ids = set(run.annotations)
        stray = sorted(run_ids - corpus_ids)
        if stray:
            raise InputError(
                f"run {run.labeler_id!r} annotates documents missing from the corpus: "
                + ", ".join(stray)
            )
        covered |= run_ids
    sample = [d.doc_id for d in docs if d.doc_id in covered]
    report = agreement_report(runs, candidates_by_doc or {}, sample)

    pairs = report.pairs
    if wanted is not None:
        pairs = tuple(
            p for p in pairs if frozenset((p.labeler_a, p.labeler_b)) in wanted
        )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "agreement_report",
        "n_docs": report.n_docs,
        "n_entities": report.n_entities,
        "pairs": [
            {
                "labeler_a": p.labeler_a,
                "labeler_b": p.labeler_b,
                "kind": p.kind,
                "n_docs": p.n_docs,
                "n_positions": p.n_positions,
                "avg_jaccard": p.avg_jaccard,
                "overall": p.overall,
                "kappa": p.kappa,
            }
            for p in pairs
        ],
    }
    _write_json(args.out, payload)
    if args.table:
        filtered = report if wanted is None else report.__class__(
            n_docs=report.n_docs, n_entities=report.n_entities, pairs=pairs
        )
        atomic_write_text(args.table, render_agreement_table(filtered))
    log.info("agreement report over %d documents written to %s", report.n_docs, args.out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    gold = read_annotation_run(args.gold)
    runs = [read_annotation_run(p) for p in args.runs]
    pairing = derive_icl_pairing(runs) if args.pair_icl else {}
    report = compare_configs(runs, gold, pairing)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "eval_report",
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
    }
    _write_json(args.out, payload)
    if args.table:
        atomic_write_text(args.table, render_eval_table(report))
    log.info("eval report over %d documents written to %s", report.n_docs, args.out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceState, create_app
    from .store import LogStore

    docs, candidates_by_doc = read_corpus(args.corpus)
    if candidates_by_doc is None:
        raise InputError(
            f"{args.corpus}: corpus has no candidate lists; run the candidates step first"
        )
    annotators = [a for a in args.annotators.split(",") if a]
    if not annotators:
        raise InputError("--annotators must name at least one annotator")
    model_runs = _load_runs(args.runs) if args.runs else []
    gold = read_annotation_run(args.gold) if args.gold else None
    guidelines = Path(args.guidelines).read_text(encoding="utf-8") if args.guidelines else ""

    store = LogStore(args.store)
    try:
        state = ServiceState(
            docs=docs,
            base_candidates=candidates_by_doc,
            store=store,
            annotators=annotators,
            threshold=args.threshold,
            guidelines=guidelines,
            model_runs=model_runs,
            gold=gold,
        )
        app = create_app(state)
        log.info("serving %d documents for %s on %s:%d", len(docs), annotators, args.host, args.port)
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        store.close()
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    docs = fixture_corpus(n_docs=args.docs, seed=args.seed)
    text = render_conll_source(docs) if args.format == "conll" else render_jsonl_source(docs)
    atomic_write_text(args.out, text)
    log.info("wrote %d fixture documents (%s) to %s", len(docs), args.format, args.out)
    return 0


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="protag", description="Protagonist-organization annotation pipeline.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="parse a source corpus into the canonical format")
    p.add_argument("--format", choices=("conll", "jsonl"), required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus-tag", default="")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("candidates", help="extract candidate organizations per document")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("annotate", help="run a completion backend over the corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=("base", "icl"), default="base")
    p.add_argument("--guidance", choices=("with", "without"), default="with")
    p.add_argument("--context", default="full", help="'full' or 'reduced:N'")
    p.add_argument("--backend", required=True, help="http(s) URL or mock:<strategy>")
    p.add_argument("--role", choices=("model", "gold"), default="model")
    p.add_argument("--out", required=True)
    p.add_argument("--template", default="")
    p.add_argument("--exemplars", default="", help="exemplar JSON file (icl mode)")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--model", default="", help="model name for HTTP backends")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-output-tokens", type=int, default=512)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("agree", help="pairwise agreement over annotation runs")
    p.add_argument("--annotations", nargs="+", required=True, help="run files or store files")
    p.add_argument("--corpus", required=True, help="candidate-augmented corpus file")
    p.add_argument("--pairs", default="all", help="'all' or comma list like A1:A2,A1:m1")
    p.add_argument("--out", required=True)
    p.add_argument("--table", default="", help="also write a plain-text table here")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("eval", help="score runs against a gold run")
    p.add_argument("--gold", required=True)
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--pair-icl", action="store_true", help="pair icl rows with base rows")
    p.add_argument("--out", required=True)
    p.add_argument("--table", default="", help="also write a plain-text table here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--annotators", default="A1,A2,A3,A4")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--runs", nargs="*", default=[], help="model run files for live reports")
    p.add_argument("--gold", default="", help="gold run file for the eval report")
    p.add_argument("--guidelines", default="", help="override the built-in guidelines")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("fixture", help="write a deterministic demo corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("jsonl", "conll"), default="jsonl")
    p.add_argument("--docs", type=int, default=12)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CoverageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeFailure as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except ProtagError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
