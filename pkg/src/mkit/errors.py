"""Exception types shared across the package."""


class JetError(ValueError):
    """Invalid jet-algebra operation: backend mix, arity or order violation."""


class ExactBackendError(ValueError):
    """A scale factor is not a rational square; the exact backend cannot
    represent it.  Convert the input to the float backend and retry."""


class DegeneratePointError(ValueError):
    """The Hessian at the point is singular; the local analysis is undefined."""


class NullDirectionError(ValueError):
    """The direction has zero metric length; no adapted orthogonal frame exists."""


class ImplicitSolveError(ValueError):
    """The implicit graph equation has no series solution at the origin."""


class SingularMatrixError(ValueError):
    """Linear solve or inversion hit a singular matrix."""


class InternalCheckError(RuntimeError):
    """Two independent computation routes disagreed.  This is an internal
    consistency failure, not a user error; it should never fire."""
