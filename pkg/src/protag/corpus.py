"""News-document model plus the two source parsers and the canonical corpus file.

Documents carry character-offset entity mentions over `Document.text`, which is
`headline + "\\n" + body` when a headline exists and just `body` otherwise.
Both parsers normalize mentions to be in-bounds, offset-sound, and
non-overlapping before a document is accepted.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InputError, ParseError, RecordError, SchemaError
from .files import read_jsonl, write_jsonl

log = logging.getLogger(__name__)

PROVENANCE_NER = "ner"
PROVENANCE_ANNOTATOR = "annotator_added"


@dataclass(frozen=True)
class EntityMention:
    surface: str
    start: int
    end: int
    ner_type: str = "ORG"
    provenance: str = PROVENANCE_NER


@dataclass
class Document:
    doc_id: str
    headline: str
    body: str
    corpus_tag: str
    mentions: list[EntityMention] = field(default_factory=list)

    @property
    def text(self) -> str:
        if self.headline:
            return f"{self.headline}\n{self.body}"
        return self.body


def validate_document(doc: Document) -> None:
    """Check offset soundness and non-overlap; raises RecordError."""
    text = doc.text
    last_end = 0
    for m in sorted(doc.mentions, key=lambda m: (m.start, m.end)):
        if not (0 <= m.start < m.end <= len(text)):
            raise RecordError(
                f"mention span [{m.start},{m.end}) out of bounds for text of length {len(text)}",
                doc.doc_id,
            )
        if text[m.start : m.end] != m.surface:
            raise RecordError(
                f"mention surface {m.surface!r} does not match text slice "
                f"{text[m.start:m.end]!r} at [{m.start},{m.end})",
                doc.doc_id,
            )
        if m.start < last_end:
            raise RecordError(f"overlapping mention at [{m.start},{m.end})", doc.doc_id)
        last_end = m.end


def _resolve_overlaps(doc_id: str, mentions: list[EntityMention]) -> list[EntityMention]:
    """Keep the longer of two nested spans; on partial overlap keep the earlier."""
    ordered = sorted(mentions, key=lambda m: (m.start, -(m.end - m.start)))
    kept: list[EntityMention] = []
    for m in ordered:
        if kept and m.start < kept[-1].end:
            prev = kept[-1]
            why = "contained in" if m.end <= prev.end else "partially overlapping"
            log.warning(
                "doc %s: dropping mention %r [%d,%d) %s %r [%d,%d)",
                doc_id, m.surface, m.start, m.end, why, prev.surface, prev.start, prev.end,
            )
            continue
        kept.append(m)
    return kept


# --- CoNLL column format -----------------------------------------------------

DOCSTART = "-DOCSTART-"


def parse_conll(source: str | Iterable[str], corpus_tag: str = "conll") -> list[Document]:
    """Parse BIO-tagged token columns into documents.

    Token is the first column, the BIO tag the last. Text is reconstructed by
    joining tokens with single spaces; offsets refer to that reconstruction.
    An I-ORG with no open run is repaired to B-ORG with a warning.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    docs: list[Document] = []
    tokens: list[str] = []
    tags: list[str] = []
    n_columns: int | None = None

    def close_document() -> None:
        nonlocal tokens, tags
        if tokens:
            docs.append(_document_from_tokens(tokens, tags, corpus_tag, len(docs)))
        tokens, tags = [], []

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue  # sentence break; joining is by single space regardless
        fields = line.split()
        if fields[0] == DOCSTART:
            close_document()
            continue
        if len(fields) < 2:
            raise ParseError(f"expected at least 2 columns, got {len(fields)}", line_no)
        if n_columns is None:
            n_columns = len(fields)
        elif len(fields) != n_columns:
            raise ParseError(
                f"expected {n_columns} columns, got {len(fields)}", line_no
            )
        tokens.append(fields[0])
        tags.append(fields[-1])
    close_document()
    return docs


def _document_from_tokens(
    tokens: list[str], tags: list[str], corpus_tag: str, ordinal: int
) -> Document:
    starts: list[int] = []
    pos = 0
    for tok in tokens:
        starts.append(pos)
        pos += len(tok) + 1
    text = " ".join(tokens)

    mentions: list[EntityMention] = []
    run_start: int | None = None  # token index of the open ORG run
    prev_in_org = False

    def close_run(end_token: int) -> None:
        nonlocal run_start
        if run_start is None:
            return
        start = starts[run_start]
        end = starts[end_token] + len(tokens[end_token])
        mentions.append(EntityMention(surface=text[start:end], start=start, end=end))
        run_start = None

    for i, tag in enumerate(tags):
        if tag == "B-ORG":
            close_run(i - 1)
            run_start = i
            prev_in_org = True
        elif tag == "I-ORG":
            if not prev_in_org:
                log.warning(
                    "token %r: I-ORG without open run, repaired to B-ORG", tokens[i]
                )
                close_run(i - 1)
                run_start = i
            prev_in_org = True
        else:
            close_run(i - 1)
            prev_in_org = False
    close_run(len(tokens) - 1)

    doc_id = f"{corpus_tag}-{ordinal:04d}"
    doc = Document(doc_id=doc_id, headline="", body=text, corpus_tag=corpus_tag, mentions=mentions)
    validate_document(doc)
    return doc


# --- JSONL records ------------------------------------------------------------


def parse_jsonl(source: str | Iterable[str], corpus_tag: str = "jsonl") -> list[Document]:
    """Parse one-record-per-line documents.

    Record schema: {doc_id, headline, body, mentions: [{start, end, type}]}.
    Offsets index into headline + "\\n" + body (or body alone when the headline
    is empty). Out-of-bounds spans reject the record; duplicate doc_ids reject
    the corpus. Nested/overlapping spans are normalized with a warning.
    """
    import json

    lines = source.splitlines() if isinstance(source, str) else source
    docs: list[Document] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON record: {exc}", line_no) from exc
        doc = _document_from_record(record, corpus_tag, line_no)
        if doc.doc_id in seen_ids:
            raise InputError(f"duplicate doc_id {doc.doc_id!r} (line {line_no})")
        seen_ids.add(doc.doc_id)
        docs.append(doc)
    return docs


def _document_from_record(record: dict, corpus_tag: str, line_no: int) -> Document:
    if "doc_id" not in record or "body" not in record:
        raise ParseError("record must carry doc_id and body", line_no)
    doc_id = str(record["doc_id"])
    headline = str(record.get("headline", "") or "")
    body = str(record["body"])
    text = f"{headline}\n{body}" if headline else body

    mentions: list[EntityMention] = []
    for m in record.get("mentions", []):
        try:
            start, end = int(m["start"]), int(m["end"])
        except (KeyError, TypeError, ValueError):
            raise RecordError(f"mention record {m!r} lacks integer start/end", doc_id)
        if not (0 <= start < end <= len(text)):
            raise RecordError(
                f"mention span [{start},{end}) out of bounds for text of length {len(text)}",
                doc_id,
            )
        surface = text[start:end]
        if "surface" in m and m["surface"] != surface:
            raise RecordError(
                f"mention surface {m['surface']!r} does not match slice {surface!r}", doc_id
            )
        mentions.append(
            EntityMention(
                surface=surface,
                start=start,
                end=end,
                ner_type=str(m.get("type", m.get("ner_type", "ORG"))),
                provenance=str(m.get("provenance", PROVENANCE_NER)),
            )
        )
    mentions = _resolve_overlaps(doc_id, mentions)
    doc = Document(
        doc_id=doc_id, headline=headline, body=body, corpus_tag=corpus_tag, mentions=mentions
    )
    validate_document(doc)
    return doc


# --- canonical corpus file ----------------------------------------------------

CORPUS_KIND = "corpus"


def _mention_to_record(m: EntityMention) -> dict:
    return {
        "surface": m.surface,
        "start": m.start,
        "end": m.end,
        "ner_type": m.ner_type,
        "provenance": m.provenance,
    }


def _mention_from_record(r: dict) -> EntityMention:
    return EntityMention(
        surface=r["surface"],
        start=r["start"],
        end=r["end"],
        ner_type=r["ner_type"],
        provenance=r["provenance"],
    )


def write_corpus(
    docs: list[Document],
    path: str | Path,
    candidates_by_doc: dict[str, list] | None = None,
) -> None:
    """Write the canonical line-delimited corpus file (atomic).

    All documents must share one corpus_tag; it lives in the header record.
    When `candidates_by_doc` is given, each record also carries the document's
    candidate list (see the candidates module for the entry shape).
    """
    from .candidates import candidate_to_record  # local import to avoid a cycle

    tags = {d.corpus_tag for d in docs}
    if len(tags) > 1:
        raise InputError(f"documents carry mixed corpus tags: {sorted(tags)}")
    corpus_tag = docs[0].corpus_tag if docs else ""

    def records() -> Iterator[dict]:
        for d in docs:
            validate_document(d)
            rec = {
                "doc_id": d.doc_id,
                "headline": d.headline,
                "body": d.body,
                "mentions": [_mention_to_record(m) for m in d.mentions],
            }
            if candidates_by_doc is not None:
                if d.doc_id not in candidates_by_doc:
                    raise InputError(f"no candidate list for doc {d.doc_id!r}")
                rec["candidates"] = [
                    candidate_to_record(c) for c in candidates_by_doc[d.doc_id]
                ]
            yield rec

    write_jsonl(path, {"kind": CORPUS_KIND, "corpus_tag": corpus_tag}, records())


def read_corpus(path: str | Path) -> tuple[list[Document], dict[str, list] | None]:
    """Load a canonical corpus file; returns (documents, candidates or None).

    Refuses files whose header schema version is unknown.
    """
    from .candidates import candidate_from_record

    header, records = read_jsonl(path, expect_kind=CORPUS_KIND)
    corpus_tag = header.get("corpus_tag", "")
    docs: list[Document] = []
    candidates: dict[str, list] = {}
    have_candidates = False
    seen: set[str] = set()
    for rec in records:
        doc = Document(
            doc_id=rec["doc_id"],
            headline=rec["headline"],
            body=rec["body"],
            corpus_tag=corpus_tag,
            mentions=[_mention_from_record(m) for m in rec["mentions"]],
        )
        if doc.doc_id in seen:
            raise InputError(f"{path}: duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        validate_document(doc)
        docs.append(doc)
        if "candidates" in rec:
            have_candidates = True
            candidates[doc.doc_id] = [candidate_from_record(c) for c in rec["candidates"]]
    if have_candidates and len(candidates) != len(docs):
        raise SchemaError(f"{path}: candidate lists present for only some documents")
    return docs, (candidates if have_candidates else None)
