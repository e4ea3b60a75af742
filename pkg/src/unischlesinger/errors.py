"""Exception hierarchy shared by all modules."""


class LoopError(Exception):
    """Base class for numerical failures in this package."""


class ShapeError(LoopError, ValueError):
    pass


class DealiasingError(LoopError):
    """Grid too small to hold a product without aliasing."""


class ResolutionError(LoopError):
    """Data is not resolved at the requested cutoff."""


class SingularNodeError(LoopError):
    """A matrix that must be invertible is (numerically) singular at a node."""


class GlobalIndexError(LoopError):
    """det G winds around the origin; the factorization is not unique/solvable."""


class BranchError(LoopError):
    """A logarithm or root branch cannot be continued along the circle."""


class SolvabilityError(LoopError):
    """Loop outside the solvable neighborhood (Galerkin solve ill-posed or inaccurate)."""


class IndexWindowError(LoopError, IndexError):
    """Requested coefficient index lies outside the stored table."""


class NotADiffeomorphismError(LoopError):
    """Lift is not monotone increasing."""


class FlowError(LoopError):
    """Flow integration failed or produced a non-monotone map."""


class OnContourError(LoopError, ValueError):
    """Evaluation point too close to the unit circle."""
