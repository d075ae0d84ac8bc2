"""
Exception hierarchy for ffradon.

Every error derives from ``FFRadonError`` and, where one fits, from the
closest builtin so callers may catch either.  The command line maps
``FFRadonError`` to exit code 2.
"""

from __future__ import annotations

from typing import Optional


class FFRadonError(Exception):
    """Base class for all ffradon errors."""


class NotPrimeError(FFRadonError, ValueError):
    """The requested characteristic is not prime (or q is not a prime power)."""

    def __init__(self, value: int) -> None:
        super().__init__(f"{value} is not prime")
        self.value = value


class ReducibleModulusError(FFRadonError, ValueError):
    """The modulus polynomial is not monic irreducible of the requested degree."""


class SizeCapExceededError(FFRadonError):
    """A field, point set or plane family exceeds the configured cap."""

    def __init__(self, what: str, size: int, cap: int) -> None:
        super().__init__(f"{what} size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class FieldDivisionByZeroError(FFRadonError, ZeroDivisionError):
    """Inversion of, or division by, the zero element."""


class EmptyInputError(FFRadonError, ValueError):
    """An operation that needs at least one point received none."""


class DimensionMismatchError(FFRadonError, ValueError):
    """Objects from different spaces (q or d) or plane families were combined."""


class BadExponentError(FFRadonError, ValueError):
    """An exponent is below 1 or cannot be parsed."""


class EmptySetError(FFRadonError, ValueError):
    """A point set that must be nonempty is empty."""


class ZeroFunctionError(FFRadonError, ValueError):
    """A norm ratio was requested for the zero function."""


class OutOfSquareError(FFRadonError, ValueError):
    """An exponent pair (1/p, 1/r) lies outside the unit square."""


class TooFewPointsError(FFRadonError, ValueError):
    """A regression was requested with fewer than three samples."""


class InfeasibleLevelsError(FFRadonError, ValueError):
    """A step function cannot place the requested number of disjoint levels."""


class TooLargeExactError(FFRadonError):
    """An exhaustive tuple scan would exceed the tuple budget."""


class NoConvergenceError(FFRadonError):
    """A power iteration did not reach the requested tolerance."""


class ParseError(FFRadonError, ValueError):
    """Malformed command-line input; ``line_number`` is 1-based when known."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
