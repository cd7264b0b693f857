"""Error taxonomy shared across the package."""
from __future__ import annotations


class DomainError(ValueError):
    """Input violates a physical or mathematical precondition."""


class ConventionError(DomainError):
    """A sign-convention choice contradicts a pinned target state.

    Raised by the preparation steps when the configured pulse sense does not
    reproduce the documented output; see the conventions section of the README
    for the calibrated defaults.
    """


class SequenceSyntaxError(ValueError):
    """Pulse-program text error carrying a 1-based line:column position."""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}")
