"""Exception types shared across the library."""


class AnnulusDynError(Exception):
    """Base class for library errors."""


class NearRationalError(AnnulusDynError):
    """A value requested as irrational is indistinguishable from a small rational."""

    def __init__(self, alpha, p, q, dist):
        self.alpha = alpha
        self.p = p
        self.q = q
        self.dist = dist
        super().__init__(
            f"alpha={alpha!r} is within {dist:.3e} of {p}/{q}; treat it as rational"
        )


class OutOfDomainError(AnnulusDynError):
    """Evaluation requested outside the declared domain of a restricted map."""


class NoConvergenceError(AnnulusDynError):
    """An iterative solve failed to bracket or converge."""


class NotPeriodicError(AnnulusDynError):
    """The point is not periodic of the claimed period within tolerance."""


class NotLiftedError(AnnulusDynError):
    """The lift displacement of a periodic orbit is not near an integer."""


class NotInBasinError(AnnulusDynError):
    """The seed point classifies into the wrong basin for the requested end."""


class InvalidChainError(AnnulusDynError):
    """A point list is not a valid delta-chain for the map."""


class AmbiguousLiftError(AnnulusDynError):
    """delta >= 1/2 makes chain lifting non-unique."""


class ItineraryViolationError(AnnulusDynError):
    """Exact arithmetic contradicts the requested symbolic itinerary."""


class ZeroOnBoundaryError(AnnulusDynError):
    """The displacement field vanishes (or nearly so) on the index loop."""


class UnresolvedWindingError(AnnulusDynError):
    """An angular increment along the index loop exceeded pi/2; raise the sample count."""
