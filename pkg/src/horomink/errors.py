"""Exception types shared across the package."""


class HoromkError(Exception):
    """Base class for all package-specific errors."""


class SpecError(HoromkError):
    """A polytope spec or measure violates a structural precondition."""


class DegenerateBodyError(HoromkError):
    """The body collapses to a single point and has no interior."""


class PointInsideError(HoromkError):
    """A separating horoball was requested for a point inside the body."""


class NotEvenError(HoromkError):
    """An operation requiring an origin-symmetric (even) input got an odd one."""


class UnreachableTargetError(HoromkError):
    """A rescaling target lies outside the range of the constraint functional."""


class MismatchedDirectionsError(HoromkError):
    """Measure atoms do not line up with the polytope's facet directions."""
