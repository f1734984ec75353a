"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for all geometry, flow and verification errors."""


class InvalidArgumentError(GeometryError, ValueError):
    """Malformed input: wrong dimension, unnormalized vector, bad descriptor."""


class FrameConstructionError(GeometryError):
    """Orthonormalization failed: degenerate span or no timelike direction."""


class DomainError(GeometryError):
    """A point does not lie on the manifold an operation requires."""


class EmptyHypersurfaceError(GeometryError):
    """The requested umbilical hypersurface has no points on the upper sheet."""


class TimeOutOfRangeError(GeometryError):
    """A flow or gauge was evaluated outside its maximal time domain."""


class GaugeDomainError(TimeOutOfRangeError):
    """A Lorentzian time below the conversion bound has no hyperbolic counterpart."""


class ChartDegenerateError(GeometryError):
    """Finite differencing hit a chart with a singular induced metric."""


class InsufficientSamplesError(GeometryError):
    """Too few samples to form the finite differences a check needs."""


class StationaryNoLimitError(GeometryError):
    """A totally geodesic immersion does not move; it has no boundary limit."""
