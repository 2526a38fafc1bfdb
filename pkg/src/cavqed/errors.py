"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
regime-validity violations exit 2, numerical failures exit 3.
"""


class CavqedError(Exception):
    """Base class for all package errors."""


class DimensionError(CavqedError):
    """Invalid Hilbert-space dimension (e.g. mode cutoff < 2)."""


class SpaceMismatchError(CavqedError):
    """Operands live on different Hilbert spaces."""


class ConfigurationError(CavqedError):
    """Invalid or inconsistent configuration / parameters."""


class RegimeValidityError(CavqedError):
    """A regime precondition failed.  Carries the margin report."""

    def __init__(self, message, margins=None):
        super().__init__(message)
        self.margins = margins or []


class SingularCouplingError(CavqedError):
    """A coupling denominator is singular (or forbidden by the regime)."""


class AmbiguousResonanceError(CavqedError):
    """A term-pair frequency sum is too small to average but not resonant."""


class NumericalFailure(CavqedError):
    """Accuracy or positivity gate violated during propagation."""
