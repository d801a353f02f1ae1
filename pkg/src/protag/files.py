"""Line-delimited JSON files with a header record, written atomically.

Every file this package produces starts with a header line carrying
`schema_version` and a `kind` tag, so readers can refuse files they do not
understand instead of misparsing them.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SchemaError

SCHEMA_VERSION = "v1"


def dump_record(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory + rename; no partial outputs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_jsonl(path: str | Path, header: dict, records: Iterable[dict]) -> None:
    header = {"schema_version": SCHEMA_VERSION, **header}
    lines = [dump_record(header)]
    lines.extend(dump_record(r) for r in records)
    atomic_write_text(path, "\n".join(lines) + "\n")


def peek_kind(path: str | Path) -> str:
    """Read just the header's kind tag, validating the schema version."""
    header, _ = read_jsonl(path)
    kind = header.get("kind")
    if not kind:
        raise SchemaError(f"{path}: header has no kind tag")
    return kind


def read_jsonl(path: str | Path, expect_kind: str | None = None) -> tuple[dict, Iterator[dict]]:
    """Return (header, record iterator). Refuses unknown schema versions."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.strip():
        raise SchemaError(f"{path}: empty file, expected a header record")
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: header is not valid JSON: {exc}") from exc
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: unsupported schema version {version!r} (expected {SCHEMA_VERSION!r})"
        )
    if expect_kind is not None and header.get("kind") != expect_kind:
        raise SchemaError(
            f"{path}: file kind {header.get('kind')!r} is not {expect_kind!r}"
        )

    def _records() -> Iterator[dict]:
        with open(path, encoding="utf-8") as fh:
            fh.readline()  # header
            for line_no, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"{path}: bad record on line {line_no}: {exc}") from exc

    return header, _records()
