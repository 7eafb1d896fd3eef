"""Exception hierarchy shared by every module of the package."""


class ParkingError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ParkingError, ValueError):
    """An argument violates a documented precondition or type invariant."""


class SingularityError(ParkingError, ArithmeticError):
    """The kinematics are undefined at the requested configuration."""


class AtGoalSingularityError(SingularityError):
    """Distance to the goal is below the guard, so the polar angles are undefined."""


class ArticulationSingularityError(SingularityError):
    """The articulation factor ``l2 + l1*cos(phi)`` vanished (robot fully folded)."""


class PositioningError(ParkingError):
    """Bearing-only localisation could not produce a pose."""


class DegenerateGeometryError(PositioningError):
    """Robot coincides with a beacon or a subtended angle has zero sine."""


class IndeterminateConfigurationError(PositioningError):
    """Robot lies on the circumcircle of the beacons; resection has no unique answer."""


class InconsistentMeasurementError(PositioningError):
    """Bearings do not correspond to any pose in the valid region."""
