from __future__ import annotations

from typing import Any, Optional, Sequence


class TermBridgeError(Exception):
    pass


class ParseError(TermBridgeError):
    def __init__(self, message: str, span=None):
        self.span = span
        if span is not None:
            message = f"{message} (line {span.line}, column {span.column})"
        super().__init__(message)


class InvalidClauseError(TermBridgeError):
    """Clause head is a variable, number or foreign reference."""


class GoalTypeError(TermBridgeError):
    """A goal that cannot be called (unbound variable, number, reference)."""


class ResolutionDepthError(TermBridgeError):
    """The resolution depth limit was exceeded; distinct from failure."""


class NoSolutionError(TermBridgeError):
    pass


class ConversionError(TermBridgeError):
    def __init__(self, message: str, term: Any = None, target: Optional[type] = None,
                 steps: Sequence[str] = ()):
        self.term = term
        self.target = target
        self.steps = tuple(steps)
        detail = []
        if term is not None:
            detail.append(f"term={term}")
        if target is not None:
            detail.append(f"target={getattr(target, '__name__', target)}")
        if self.steps:
            detail.append("tried=" + ",".join(self.steps))
        if detail:
            message = f"{message} [{'; '.join(detail)}]"
        super().__init__(message)


class DeadReferenceError(ConversionError):
    """The reference was invalidated by a collection pass."""


class NoCodecError(ConversionError):
    pass


class NotAReferenceError(TermBridgeError):
    pass


class KeyConflictError(TermBridgeError):
    """The key is already associated with a different live object."""
