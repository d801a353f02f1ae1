"""Collapse organization mentions into per-document candidate entities.

Canonicalization is deterministic and versioned: duplicate surface forms of
the same organization collapse into one candidate keyed by `canonical_key`.
Scope is per document; there is no cross-document entity linking.
"""

import unicodedata
from dataclasses import dataclass, field, replace

from .corpus import Document, PROVENANCE_ANNOTATOR, PROVENANCE_NER
from .errors import InvalidSurfaceError

CANONICALIZER_VERSION = "c1"

# Trailing corporate designators dropped as whole final tokens. Fixed on
# purpose: a configurable list would fracture canonical keys across runs.
CORPORATE_DESIGNATORS = frozenset(
    {"inc", "corp", "ltd", "plc", "gmbh", "co", "sa", "ag", "llc"}
)


def canonicalize(surface: str) -> str:
    """Normalize a surface form into its canonical key.

    NFKC-normalize, casefold, replace punctuation with spaces, collapse
    whitespace, then strip trailing corporate designators one token at a time
    (never emptying the key). Idempotent.
    """
    if not surface or not surface.strip():
        raise InvalidSurfaceError(f"surface {surface!r} is empty")
    s = unicodedata.normalize("NFKC", surface).casefold()
    s = "".join(" " if unicodedata.category(ch).startswith("P") else ch for ch in s)
    tokens = s.split()
    if not tokens:
        raise InvalidSurfaceError(f"surface {surface!r} is punctuation-only")
    while len(tokens) > 1 and tokens[-1] in CORPORATE_DESIGNATORS:
        tokens.pop()
    return " ".join(tokens)


@dataclass
class CandidateEntity:
    canonical_key: str
    display_name: str
    aliases: set[str] = field(default_factory=set)
    mention_indices: list[int] = field(default_factory=list)
    provenance: str = PROVENANCE_NER


def extract_candidates(doc: Document) -> list[CandidateEntity]:
    """One candidate per distinct canonical key among ORG mentions.

    Ordered by first mention position. The display name is the most frequent
    surface form, ties broken by first occurrence.
    """
    by_key: dict[str, CandidateEntity] = {}
    surface_counts: dict[str, dict[str, int]] = {}
    first_surface_order: dict[str, list[str]] = {}
    for idx, mention in enumerate(doc.mentions):
        if mention.ner_type != "ORG":
            continue
        key = canonicalize(mention.surface)
        if key not in by_key:
            by_key[key] = CandidateEntity(canonical_key=key, display_name=mention.surface)
            surface_counts[key] = {}
            first_surface_order[key] = []
        cand = by_key[key]
        cand.aliases.add(mention.surface)
        cand.mention_indices.append(idx)
        counts = surface_counts[key]
        if mention.surface not in counts:
            first_surface_order[key].append(mention.surface)
        counts[mention.surface] = counts.get(mention.surface, 0) + 1
    for key, cand in by_key.items():
        counts = surface_counts[key]
        best = first_surface_order[key][0]
        for surface in first_surface_order[key][1:]:
            if counts[surface] > counts[best]:
                best = surface
        cand.display_name = best
    return list(by_key.values())


def add_manual_entity(
    candidates: list[CandidateEntity],
    surface: str,
    annotator_id: str,
    audit_log: list[dict] | None = None,
) -> list[CandidateEntity]:
    """Merge an annotator-supplied surface into the candidate list.

    Returns a new list: an existing key gains the surface as an alias, an
    absent key appends a new annotator_added candidate. The addition is
    recorded in `audit_log` when one is given. Invalid surfaces raise.
    """
    key = canonicalize(surface)
    updated: list[CandidateEntity] = []
    merged = False
    for cand in candidates:
        if cand.canonical_key == key:
            cand = replace(cand, aliases=set(cand.aliases) | {surface.strip()})
            merged = True
        updated.append(cand)
    if not merged:
        updated.append(
            CandidateEntity(
                canonical_key=key,
                display_name=surface.strip(),
                aliases={surface.strip()},
                mention_indices=[],
                provenance=PROVENANCE_ANNOTATOR,
            )
        )
    if audit_log is not None:
        audit_log.append(
            {
                "event": "entity_added",
                "annotator_id": annotator_id,
                "surface": surface.strip(),
                "canonical_key": key,
                "outcome": "merged" if merged else "new",
            }
        )
    return updated


def _is_token_infix(needle: list[str], haystack: list[str]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    return any(
        haystack[i : i + len(needle)] == needle
        for i in range(len(haystack) - len(needle) + 1)
    )


def match_free_text(name: str, candidates: list[CandidateEntity]) -> CandidateEntity | None:
    """Resolve a free-text organization name against a candidate list.

    Exact canonical-key match wins; otherwise a containment match (the key of
    one is a contiguous token run inside the other) that fits exactly one
    candidate. Anything ambiguous or unmatched returns None; this function
    never guesses.
    """
    try:
        key = canonicalize(name)
    except InvalidSurfaceError:
        return None
    for cand in candidates:
        if cand.canonical_key == key:
            return cand
    name_tokens = key.split()
    contained = [
        cand
        for cand in candidates
        if _is_token_infix(cand.canonical_key.split(), name_tokens)
        or _is_token_infix(name_tokens, cand.canonical_key.split())
    ]
    if len(contained) == 1:
        return contained[0]
    return None


def candidate_to_record(cand: CandidateEntity) -> dict:
    return {
        "canonical_key": cand.canonical_key,
        "display_name": cand.display_name,
        "aliases": sorted(cand.aliases),
        "mention_indices": list(cand.mention_indices),
        "provenance": cand.provenance,
    }


def candidate_from_record(record: dict) -> CandidateEntity:
    return CandidateEntity(
        canonical_key=record["canonical_key"],
        display_name=record["display_name"],
        aliases=set(record["aliases"]),
        mention_indices=list(record["mention_indices"]),
        provenance=record["provenance"],
    )
