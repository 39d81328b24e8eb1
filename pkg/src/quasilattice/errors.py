"""
Error types for quasilattice.

Every error carries the process exit code the command-line front end reports
for it. The classes also derive from the matching built-in exception, so code
that catches ``ValueError`` or ``RuntimeError`` keeps working.
"""


class QuasilatticeError(Exception):
    """Base class of all quasilattice errors."""

    exit_code = 1


class ValidationError(QuasilatticeError, ValueError):
    """A field, IFS or job description violates a mathematical requirement."""

    exit_code = 3


class NotAUnit(ValidationError):
    """An element that must be a unit has norm different from +1 or -1."""


class NotPisot(ValidationError):
    """The expanding factor fails the Pisot modulus pattern."""


class UnsupportedField(ValidationError):
    """The requested ring cannot host a cut-and-project scheme."""


class FieldMismatch(ValidationError):
    """Two ring elements from different fields were combined."""


class InvalidAutomorphism(ValidationError):
    """A Galois automorphism exponent or internal-plane index is invalid."""


class ParseError(QuasilatticeError, ValueError):
    """Malformed configuration text or expression."""

    exit_code = 2

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class BudgetExceeded(QuasilatticeError, RuntimeError):
    """A computation would exceed its configured size budget."""

    exit_code = 4


class Intractable(BudgetExceeded):
    """The candidate lattice Z^d_N is too large to enumerate."""


class IoError(QuasilatticeError, OSError):
    """Reading or writing an artifact failed."""

    exit_code = 5


__all__ = [
    "QuasilatticeError",
    "ValidationError",
    "NotAUnit",
    "NotPisot",
    "UnsupportedField",
    "FieldMismatch",
    "InvalidAutomorphism",
    "ParseError",
    "BudgetExceeded",
    "Intractable",
    "IoError",
]
