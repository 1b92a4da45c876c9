"""Typed errors shared across the workbench.

Every error carries a stable machine-readable ``code`` plus an optional
``detail`` payload so the HTTP layer and the CLI can translate failures
uniformly into ``{code, message, detail}`` envelopes.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all workbench failures."""

    code = "INTERNAL"

    def __init__(self, message: str, *, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def payload(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class ParseError(WorkbenchError):
    """Malformed input document (XML or JSON)."""

    code = "PARSE"

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, detail: object = None):
        if detail is None and line is not None:
            detail = {"line": line, "column": column}
        super().__init__(message, detail=detail)
        self.line = line
        self.column = column


class ModelValidationError(WorkbenchError):
    """A system model violates its structural invariants."""

    code = "INVALID_MODEL"

    def __init__(self, message: str, violations=()):
        detail = [
            {"code": v.code, "subject": v.subject, "message": v.message}
            for v in violations
        ]
        super().__init__(message, detail=detail)
        self.violations = list(violations)


class MutationError(WorkbenchError):
    """A model mutation was rejected; the model is left untouched."""

    def __init__(self, code: str, message: str, *, detail: object = None):
        super().__init__(message, detail=detail)
        self.code = code


class EmptyCorpusError(WorkbenchError):
    code = "EMPTY_CORPUS"


class SnapshotError(WorkbenchError):
    """A corpus snapshot line failed to parse or validate."""

    code = "SNAPSHOT"

    def __init__(self, message: str, *, line: int | None = None):
        super().__init__(message, detail={"line": line} if line else None)
        self.line = line


class UnknownDocumentError(WorkbenchError):
    code = "NOT_FOUND"


class ConfigError(WorkbenchError):
    code = "CONFIG"


class IndexMismatchError(WorkbenchError):
    """Index and corpus disagree; the index must be rebuilt."""

    code = "INTERNAL"


class NonFilterError(WorkbenchError):
    """A filter spec with no criteria set is rejected rather than applied."""

    code = "NON_FILTER"


class StaleComparisonError(WorkbenchError):
    """Surfaces built against different corpus snapshots cannot be compared."""

    code = "STALE_COMPARISON"
