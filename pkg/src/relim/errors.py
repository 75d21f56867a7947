"""Exception types shared across the toolkit."""

from __future__ import annotations


class RelimError(Exception):
    """Base class for all toolkit errors."""

    code = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class ParseError(RelimError):
    code = "parse-error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message, line=line, column=column)
        self.line = line
        self.column = column


class ArityError(RelimError):
    code = "arity-error"


class UnknownLabelError(RelimError):
    code = "unknown-label"


class SizeError(RelimError):
    """Expansion or search space exceeded a configured cap."""

    code = "size-cap"


class CapExceededError(RelimError):
    """An engine cap or deadline was hit; carries partial statistics."""

    code = "cap-exceeded"

    def __init__(self, message: str, stats: dict | None = None):
        super().__init__(message, stats=stats or {})
        self.stats = stats or {}


class DeadlineExceededError(CapExceededError):
    code = "deadline-exceeded"


class UnsupportedVariantError(RelimError):
    code = "unsupported-variant"


class PolicyError(RelimError):
    code = "policy-error"


class StrengthenError(RelimError):
    """A relaxation action would make the problem harder."""

    code = "strengthen-rejected"


class DomainError(RelimError):
    """A calculator was called with arguments outside the formula's domain."""

    code = "domain-error"


class InternalInconsistencyError(RelimError):
    code = "internal-inconsistency"
