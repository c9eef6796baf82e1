"""Exception types shared across the package.

Two families matter to callers: bad input (ValueError family, CLI exit
code 2) and numerical failure at runtime (RuntimeError family, CLI exit
code 3).
"""


class JohnsWalkError(Exception):
    """Base class for every error raised by this package."""


class InputDataError(JohnsWalkError, ValueError):
    """Malformed user input: files, vectors, flags."""


class GeometryError(JohnsWalkError, ValueError):
    """Invalid geometric arguments (dimension mismatch, non-interior
    point, coincident points, non-SPD matrix)."""


class NumericalError(JohnsWalkError, RuntimeError):
    """A computation failed numerically at runtime."""


class UnboundedPolytopeError(NumericalError):
    """An unbounded direction was detected while working on a polytope
    that was assumed bounded."""


class SolverError(NumericalError):
    """An iterative solver exhausted its budget before meeting its
    tolerance. ``best`` carries the best iterate found, when one exists."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class OracleInconsistencyError(NumericalError):
    """A separation oracle returned a cut that excludes a point it had
    previously accepted."""
