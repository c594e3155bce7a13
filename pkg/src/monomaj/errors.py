"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`MonomajError`,
so callers (the CLI in particular) can separate domain failures from bugs.
"""

from __future__ import annotations


class MonomajError(Exception):
    """Base class for all domain errors."""


class DimensionError(MonomajError, ValueError):
    """Operands have incompatible or unsupported sizes."""


class PreconditionError(MonomajError, ValueError):
    """An input violates a documented precondition."""


class MajorizationError(PreconditionError):
    """A required (sub)majorization relation fails.

    ``index`` is the 1-based length of the first failing prefix.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class InfeasibleHeadError(PreconditionError):
    """No admissible block length exists for a head reduction."""


class GaugeError(PreconditionError):
    """A Lorentz gauge is not concave, increasing and vanishing at zero."""


class ParameterError(PreconditionError):
    """A scalar parameter is out of range."""


class SupportError(PreconditionError):
    """A function needed to have bounded support but does not."""


class GridTooFineError(MonomajError):
    """The uniform grid needed to represent a function exceeds the cell cap."""


class KDominanceError(PreconditionError):
    """K-functional domination fails; ``witness`` is a t where it fails."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class MonotonicityError(PreconditionError):
    """An operator or function required to be monotone is not."""


class DegenerateInputError(PreconditionError):
    """The construction is undefined for this input (e.g. the zero function)."""


class NonterminationError(MonomajError, RuntimeError):
    """An iterative procedure exceeded its iteration cap."""


class RepresentationError(MonomajError, ValueError):
    """A value cannot be represented in the requested exact form."""
