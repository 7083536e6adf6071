"""
Exception hierarchy shared by the hyperbolic, dynamics and warehouse packages.
The CLI maps these onto exit codes (see hypent_cli.EXIT_CODES).
"""


class HypentError(Exception):
    """Base class for every failure raised by this project."""


class GeometryError(HypentError):
    """A point left the guarded disk or an isometry lost unit determinant."""


class ConstructionError(HypentError):
    """Surface-group construction failed (bisection or parameter schedule)."""

    def __init__(self, message, best_weight=None):
        super().__init__(message)
        self.best_weight = best_weight


class ReductionError(HypentError):
    """No element of the reduction table qualifies: the group construction is defective."""


class BudgetExceededError(HypentError):
    """An enumeration hit its element budget.

    `partial` holds whatever was completed and `completed_radius` the largest
    radius for which that partial result is exact.
    """

    def __init__(self, message, partial=None, completed_radius=0.0):
        super().__init__(message)
        self.partial = partial
        self.completed_radius = completed_radius


class WindowExhaustedError(HypentError):
    """A shift point was read outside its valid window."""


class InvalidSystemError(HypentError, ValueError):
    """Bad transversal system spec, representation or probability vector."""


class DegenerateInputError(HypentError, ValueError):
    """Input is well-formed but carries no information (flat grid, trivial exponents)."""


class CheckFailedError(HypentError):
    """An asserted invariant or inequality was violated."""
