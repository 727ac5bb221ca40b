"""Exception hierarchy shared by every solver."""


class EgmGeomError(Exception):
    """Base class for all errors raised by egmgeom."""


class InvalidInputError(EgmGeomError, ValueError):
    """Malformed, non-finite or inconsistent input."""


class InsufficientPointsError(InvalidInputError):
    pass


class InfeasibleError(EgmGeomError):
    """The quadratic program has an empty feasible region."""


class NumericalFailureError(EgmGeomError):
    """A routine hit a state that exact arithmetic rules out."""


class GapViolationError(EgmGeomError):
    """The excessive-gap condition failed beyond tolerance.

    Either a bug or a Lipschitz constant that is too small for the problem.
    """

    def __init__(self, k, smoothed_primal, dual, tol):
        self.k = k
        self.smoothed_primal = smoothed_primal
        self.dual = dual
        self.tol = tol
        super().__init__(
            f"excessive gap violated at k={k}: J_mu={smoothed_primal!r} > "
            f"D={dual!r} + {tol:.3g}"
        )


class SizeLimitError(InvalidInputError):
    """Instance too large for an exhaustive oracle."""


class TooLargeError(InvalidInputError):
    """Materializing an intermediate would exceed the allowed size."""
