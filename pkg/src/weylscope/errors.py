"""Exception taxonomy.

Two big families matter for the CLI exit codes: ``InputError`` (bad user
input, exit 2) and ``MathDomainError`` (the geometry refused: positivity,
spectral gap, jet-order exhaustion, function domain; exit 3).
"""


class WeylscopeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(WeylscopeError):
    """Malformed user input: expressions, metric files, catalog names, flags."""


class ExpressionSyntaxError(InputError):
    """Syntax error while parsing an expression.

    Attributes
    ----------
    offset : byte offset of the offending token in the source text
    expected : tuple of token descriptions that would have been legal
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}"
                         + (f" (expected {', '.join(expected)})" if expected else ""))
        self.offset = offset
        self.expected = tuple(expected)


class UnknownIdentifierError(InputError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class CatalogError(InputError):
    """Unknown catalog name or invalid catalog parameters."""


class MathDomainError(WeylscopeError):
    """Evaluation left the mathematical domain of an operation."""


class EvaluationDomainError(MathDomainError):
    """log of a non-positive argument, division by zero, fractional power
    of a non-positive base, and similar pointwise failures."""


class OrderExhaustedError(MathDomainError):
    """A jet of higher order than the source field can provide was requested."""


class PositivityError(MathDomainError):
    """A quantity that must be positive (metric minors, conformal factor,
    scalar curvature for the Derdzinski ansatz) was not."""


class SpectralGapError(MathDomainError):
    """Top eigenvalue of W+ is not simple enough to differentiate through."""

    def __init__(self, gap, tolerance, message=None):
        msg = message or f"spectral gap {gap:.3e} below tolerance {tolerance:.3e}"
        super().__init__(msg)
        self.gap = gap
        self.tolerance = tolerance


class ConsistencyError(MathDomainError):
    """An internal cross-check (tensor symmetry, trace identity) failed
    beyond tolerance; usually indicates corrupted input data."""


class PreconditionError(MathDomainError):
    """A documented precondition of a verification (e.g. the source metric
    of a conformal rescale must have harmonic W+) does not hold."""
