"""Prompt construction and response parsing for completion backends.

Prompts are pure functions of (document, candidates, spec, template). The
answer format is sentinel-delimited so that malformed output becomes an
observable parse failure instead of a silently empty selection: names go one
per line between OPEN_SENTINEL and CLOSE_SENTINEL, `NONE` marks a deliberate
empty selection, and the first line after the closing sentinel is the
one-sentence justification.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .candidates import CandidateEntity, canonicalize, match_free_text
from .corpus import Document
from .errors import (
    InputError,
    InvalidSurfaceError,
    PromptBuildError,
    ResponseParseError,
    TemplateError,
)

MODE_BASE = "base"
MODE_ICL = "icl"
WITH_CANDIDATES = "with_candidates"
NO_CANDIDATES = "no_candidates"
CONTEXT_FULL = "full"
CONTEXT_REDUCED = "reduced"

OPEN_SENTINEL = "<<<PROTAGONISTS>>>"
CLOSE_SENTINEL = "<<<END>>>"
NONE_MARKER = "NONE"

EXEMPLAR_SECTION_OPEN = "=== EXAMPLES ==="
EXEMPLAR_SECTION_CLOSE = "=== END EXAMPLES ==="

MAX_EXEMPLARS = 8

EXEMPLAR_KINDS = ("single_protagonist", "co_protagonist", "ambiguous")


@dataclass(frozen=True)
class Exemplar:
    excerpt: str
    candidate_names: tuple[str, ...]
    gold: tuple[str, ...]
    rationale: str
    kind: str = "single_protagonist"

    def validate(self, guidance: str) -> None:
        if self.kind not in EXEMPLAR_KINDS:
            raise InputError(f"unknown exemplar kind {self.kind!r}")
        if guidance == WITH_CANDIDATES:
            missing = [g for g in self.gold if g not in self.candidate_names]
            if missing:
                raise InputError(
                    f"exemplar gold names {missing} are not in its candidate list"
                )


@dataclass(frozen=True)
class Decoding:
    temperature: float = 0.0
    max_output_tokens: int = 512

    def validate(self) -> None:
        if self.max_output_tokens <= 0:
            raise InputError("max_output_tokens must be positive")


@dataclass(frozen=True)
class PromptSpec:
    mode: str
    guidance: str
    context: str = CONTEXT_FULL
    n_sentences: int = 0
    exemplars: tuple[Exemplar, ...] = ()
    template_version: str = ""
    decoding: Decoding = field(default_factory=Decoding)

    def validate(self) -> None:
        if self.mode not in (MODE_BASE, MODE_ICL):
            raise InputError(f"unknown prompt mode {self.mode!r}")
        if self.guidance not in (WITH_CANDIDATES, NO_CANDIDATES):
            raise InputError(f"unknown guidance {self.guidance!r}")
        if self.context not in (CONTEXT_FULL, CONTEXT_REDUCED):
            raise InputError(f"unknown context {self.context!r}")
        if self.context == CONTEXT_REDUCED and self.n_sentences < 1:
            raise InputError("reduced context requires n_sentences >= 1")
        if self.mode == MODE_BASE and self.exemplars:
            raise InputError("base mode must not carry exemplars")
        if self.mode == MODE_ICL and not 1 <= len(self.exemplars) <= MAX_EXEMPLARS:
            raise InputError(
                f"icl mode requires 1..{MAX_EXEMPLARS} exemplars, got {len(self.exemplars)}"
            )
        for ex in self.exemplars:
            ex.validate(self.guidance)
        self.decoding.validate()


# --- templates -----------------------------------------------------------------

_VERSION_PREFIX = "template_version:"


@dataclass(frozen=True)
class PromptTemplate:
    version: str
    body: str

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        first, _, body = text.partition("\n")
        if not first.startswith(_VERSION_PREFIX):
            raise TemplateError(
                f"template must start with {_VERSION_PREFIX!r} <version>, got {first!r}"
            )
        version = first[len(_VERSION_PREFIX) :].strip()
        if not version:
            raise TemplateError("template version is empty")
        for placeholder in ("{{document}}", "{{exemplars}}"):
            if placeholder not in body:
                raise TemplateError(f"template lacks the {placeholder} placeholder")
        return cls(version=version, body=body)


def load_template(path: str | Path) -> PromptTemplate:
    return PromptTemplate.from_text(Path(path).read_text(encoding="utf-8"))


def default_template(guidance: str) -> PromptTemplate:
    name = "guided.txt" if guidance == WITH_CANDIDATES else "unguided.txt"
    text = resources.files("protag").joinpath("templates", name).read_text(encoding="utf-8")
    return PromptTemplate.from_text(text)


def load_exemplars(path: str | Path) -> tuple[Exemplar, ...]:
    """Read an exemplar file: {"exemplars": [{kind, excerpt, candidates, gold, rationale}]}."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TemplateError(f"{path}: not valid JSON: {exc}") from exc
    raw = payload.get("exemplars")
    if not isinstance(raw, list):
        raise TemplateError(f"{path}: expected an 'exemplars' list")
    exemplars = []
    for item in raw:
        try:
            exemplars.append(
                Exemplar(
                    excerpt=item["excerpt"],
                    candidate_names=tuple(item["candidates"]),
                    gold=tuple(item["gold"]),
                    rationale=item["rationale"],
                    kind=item.get("kind", "single_protagonist"),
                )
            )
        except (KeyError, TypeError) as exc:
            raise TemplateError(f"{path}: malformed exemplar {item!r}: {exc}") from exc
    return tuple(exemplars)


def default_exemplars() -> tuple[Exemplar, ...]:
    with resources.as_file(
        resources.files("protag").joinpath("templates", "exemplars.json")
    ) as path:
        return load_exemplars(path)


def load_guidelines() -> str:
    """Annotator-facing guidelines text shipped with the package."""
    return resources.files("protag").joinpath("templates", "guidelines.md").read_text(
        encoding="utf-8"
    )


# --- document truncation ---------------------------------------------------------


def sentence_cut_points(text: str) -> list[int]:
    """Offsets just past each sentence terminator (". "/"! "/"? " + uppercase)."""
    cuts = []
    for i in range(len(text) - 2):
        if text[i] in ".!?" and text[i + 1] == " " and text[i + 2].isupper():
            cuts.append(i + 1)
    return cuts


def truncate_body(body: str, n_sentences: int) -> str:
    """First n sentences of the body; the full body when it has no more."""
    cuts = sentence_cut_points(body)
    if n_sentences > len(cuts):
        return body
    return body[: cuts[n_sentences - 1]]


def render_document_block(doc: Document, spec: PromptSpec) -> str:
    body = doc.body
    if spec.context == CONTEXT_REDUCED:
        body = truncate_body(body, spec.n_sentences)
    if doc.headline:
        return f"{doc.headline}\n{body}"
    return body


# --- prompt assembly -------------------------------------------------------------


def _numbered(names: list[str]) -> str:
    return "\n".join(f"{i}. {name}" for i, name in enumerate(names, start=1))


def render_exemplar_section(exemplars: tuple[Exemplar, ...], guidance: str) -> str:
    blocks = [EXEMPLAR_SECTION_OPEN]
    for i, ex in enumerate(exemplars, start=1):
        lines = [f"Example {i}:", "Article:", ex.excerpt]
        if guidance == WITH_CANDIDATES:
            lines += ["Candidate organizations:", _numbered(list(ex.candidate_names))]
        lines += [
            OPEN_SENTINEL,
            "\n".join(ex.gold) if ex.gold else NONE_MARKER,
            CLOSE_SENTINEL,
            f"Justification: {ex.rationale}",
        ]
        blocks.append("\n".join(lines))
    blocks.append(EXEMPLAR_SECTION_CLOSE)
    return "\n".join(blocks)


def build_prompt(
    doc: Document,
    candidates: list[CandidateEntity],
    spec: PromptSpec,
    template: PromptTemplate | None = None,
) -> str:
    """Assemble the full prompt text. Deterministic in all inputs."""
    spec.validate()
    if template is None:
        template = default_template(spec.guidance)
    if spec.template_version and spec.template_version != template.version:
        raise PromptBuildError(
            f"spec wants template {spec.template_version!r}, got {template.version!r}"
        )
    has_candidates_slot = "{{candidates}}" in template.body
    if spec.guidance == WITH_CANDIDATES and not has_candidates_slot:
        raise PromptBuildError("candidate guidance needs a template with {{candidates}}")
    if spec.guidance == NO_CANDIDATES and has_candidates_slot:
        raise PromptBuildError("candidate-free guidance cannot use a {{candidates}} template")
    if spec.guidance == WITH_CANDIDATES and not candidates:
        raise PromptBuildError(
            f"doc {doc.doc_id!r} has no candidates; record an empty annotation instead"
        )

    text = template.body
    if spec.mode == MODE_ICL:
        section = render_exemplar_section(spec.exemplars, spec.guidance)
        text = text.replace("{{exemplars}}\n", section + "\n", 1)
    else:
        text = text.replace("{{exemplars}}\n", "", 1)
    text = text.replace("{{document}}", render_document_block(doc, spec), 1)
    if has_candidates_slot:
        text = text.replace(
            "{{candidates}}", _numbered([c.display_name for c in candidates]), 1
        )
    return text


# --- answer format ---------------------------------------------------------------


def format_selection(names: list[str], justification: str = "") -> str:
    """Render a selection in the answer format; inverse of parse_response."""
    middle = "\n".join(names) if names else NONE_MARKER
    text = f"{OPEN_SENTINEL}\n{middle}\n{CLOSE_SENTINEL}"
    if justification:
        text += f"\nJustification: {justification}"
    return text


def parse_response(
    raw: str,
    candidates: list[CandidateEntity],
    guidance: str,
) -> tuple[set[str], list[str], str]:
    """Parse backend output into (selected keys, unmatched names, justification).

    Raises ResponseParseError when the sentinel block is absent or empty;
    emptiness must be stated with the NONE marker, never implied.
    """
    lines = raw.splitlines()
    try:
        open_idx = next(i for i, ln in enumerate(lines) if ln.strip() == OPEN_SENTINEL)
        close_idx = next(
            i for i in range(open_idx + 1, len(lines)) if lines[i].strip() == CLOSE_SENTINEL
        )
    except StopIteration:
        raise ResponseParseError("response lacks the answer sentinels") from None

    names = [ln.strip() for ln in lines[open_idx + 1 : close_idx] if ln.strip()]
    if not names:
        raise ResponseParseError("empty answer block; an empty selection must say NONE")

    justification = ""
    for ln in lines[close_idx + 1 :]:
        if ln.strip():
            justification = ln.strip()
            if justification.lower().startswith("justification:"):
                justification = justification[len("justification:") :].strip()
            break

    if names == [NONE_MARKER]:
        return set(), [], justification

    selected: set[str] = set()
    unmatched: list[str] = []
    if guidance == WITH_CANDIDATES:
        alias_index = {alias: c.canonical_key for c in candidates for alias in c.aliases}
        key_set = {c.canonical_key for c in candidates}
        display_index = {c.display_name: c.canonical_key for c in candidates}
        for name in names:
            if name in display_index:
                selected.add(display_index[name])
                continue
            if name in alias_index:
                selected.add(alias_index[name])
                continue
            try:
                key = canonicalize(name)
            except InvalidSurfaceError:
                unmatched.append(name)
                continue
            if key in key_set:
                selected.add(key)
            else:
                unmatched.append(name)
    else:
        for name in names:
            cand = match_free_text(name, candidates)
            if cand is None:
                unmatched.append(name)
            else:
                selected.add(cand.canonical_key)
    return selected, unmatched, justification
