"""Exception hierarchy.  The CLI maps these onto exit codes."""


class GeometryError(Exception):
    """Base class for all errors raised by projflat."""


class DomainError(GeometryError):
    """A point (or stencil node, or path) lies outside a field's domain."""


class DegenerateMetricError(GeometryError):
    """The metric fails the positive-definiteness test."""


class PreconditionError(GeometryError):
    """An operation's hypothesis is violated, e.g. a non-symmetric Ricci tensor."""


class IntegrationError(GeometryError):
    """An ODE integration failed.

    ``location`` is the last point at which the state was still valid;
    ``partial`` optionally holds the samples computed before the failure.
    """

    def __init__(self, message, location=None, partial=None):
        super().__init__(message)
        self.location = location
        self.partial = partial


class NotProjectivelyFlatError(GeometryError):
    """The Y-tensor exceeds the flatness threshold on the working region."""

    def __init__(self, message, sup_y=None):
        super().__init__(message)
        self.sup_y = sup_y


class DegenerateFrameError(GeometryError):
    """The tangent parts of a parallel frame have rank < 2."""


class ChartError(GeometryError):
    """A projective point lies on the line at infinity of the affine chart."""


class DegenerateParamsError(GeometryError):
    """Liouville parameters whose determinant factor vanishes identically."""
