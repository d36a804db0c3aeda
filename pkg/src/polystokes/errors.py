"""Exception types raised across the package."""


class PolyStokesError(Exception):
    """Base class for all package errors."""


class SelfIntersecting(PolyStokesError):
    """Polygon boundary crosses itself."""


class DegenerateCorner(PolyStokesError):
    """Corner opening is 0 or a full turn (back-tracking edges)."""


class MeshFailure(PolyStokesError):
    """Mesh generation could not meet the quality threshold."""


class NotConverged(PolyStokesError):
    """Iterative root polishing exhausted its budget."""


class CertificationFailed(PolyStokesError):
    """Argument-principle count disagrees with the root candidate."""


class BoundaryRoot(PolyStokesError):
    """A zero sits (numerically) on the contour of a winding integral."""


class QuadratureUnderResolved(PolyStokesError):
    """Adaptive quadrature failed its internal agreement check."""


class SolverFailure(PolyStokesError):
    """Linear solve did not reach the requested residual tolerance."""


class IncompatibleData(PolyStokesError):
    """Data violates a compatibility hypothesis (mean-zero or initial value)."""


class CutoffDegenerate(PolyStokesError):
    """All cut-off profiles give the same nonzero corner integral."""


class HypothesisViolated(PolyStokesError):
    """A diagnostic was invoked outside its stated hypotheses."""


class TransformUnderResolved(PolyStokesError):
    """Quadrature error estimate of a numerical transform exceeds tolerance."""


class ContourUnderResolved(PolyStokesError):
    """Doubling the contour resolution changes the output beyond tolerance."""


class ConfigInvalid(PolyStokesError):
    """Run configuration violates the documented schema."""
