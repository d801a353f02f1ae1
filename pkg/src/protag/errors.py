"""Exception hierarchy shared across the package.

Two broad families matter to callers: `InputError` means the user gave us
something invalid (bad file, bad flag, bad payload) and maps to exit code 1
in the CLI; `RuntimeFailure` means the environment failed us (backend down,
corrupted state) and maps to exit code 2.
"""


class ProtagError(Exception):
    pass


class InputError(ProtagError):
    pass


class RuntimeFailure(ProtagError):
    pass


class ParseError(InputError):
    """Malformed source line; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class RecordError(InputError):
    """A single record failed validation; carries the offending doc_id."""

    def __init__(self, message: str, doc_id: str):
        super().__init__(f"doc {doc_id!r}: {message}")
        self.doc_id = doc_id


class SchemaError(InputError):
    """File header missing, or its schema version is not one we can load."""


class InvalidSurfaceError(InputError):
    """A surface form that cannot be canonicalized (empty or punctuation-only)."""


class TemplateError(InputError):
    """Prompt template file is malformed or missing a required placeholder."""


class PromptBuildError(InputError):
    """PromptSpec and inputs are inconsistent (e.g. candidate guidance without candidates)."""


class ResponseParseError(ProtagError):
    """Backend output did not follow the answer format."""


class BackendError(RuntimeFailure):
    """Completion backend failure. `transient` failures are retried."""

    def __init__(self, message: str, transient: bool = False):
        super().__init__(message)
        self.transient = transient


class AlignmentError(InputError):
    """Two label vectors do not cover the same (doc, entity) sequence."""


class CoverageError(InputError):
    """A labeler is missing annotations for documents in the sample."""

    def __init__(self, message: str, doc_ids: list[str]):
        super().__init__(message)
        self.doc_ids = doc_ids


class StoreError(InputError):
    """Record rejected by the annotation store before write."""


class StoreCorruptError(RuntimeFailure):
    """Annotation store damaged beyond the recoverable trailing-line case."""
