"""Exception hierarchy shared across the library.

Exit-code mapping used by the CLI: invalid input and degenerate geometry
map to 2, iteration caps to 3, broken internal invariants to 4.
"""


class CwApproxError(Exception):
    """Base class for all library errors."""


class InvalidInputError(CwApproxError):
    """Malformed or inconsistent caller input (bad simplex, partial map, ...)."""


class DegenerateGeometryError(CwApproxError):
    """Geometric predicate cannot be resolved (flat simplex, zero vector, ...)."""


class UnsupportedDimensionError(InvalidInputError):
    """Operation only defined up to a fixed dimension (edgewise needs dim <= 3)."""


class GeometryViolationError(CwApproxError):
    """A geometric invariant that should hold by construction failed at runtime."""


class UndefinedResultError(CwApproxError):
    """The requested quantity is undefined for this input (e.g. no edges)."""


class PreconditionError(CwApproxError):
    """A documented precondition was violated."""


class InconsistencyError(CwApproxError):
    """A computed object contradicts what the theory guarantees."""


class NonTerminationError(CwApproxError):
    """Iteration cap reached; carries the last state for diagnostics/restart."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class InternalError(CwApproxError):
    """Broken internal invariant; indicates a bug, not a caller mistake."""
