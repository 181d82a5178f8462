"""Exception types raised across the package."""


class MPSDriveError(Exception):
    """Base class for all package errors."""


class DegenerateDominantEigenvalue(MPSDriveError):
    """The transfer matrix has no unique dominant eigenvalue."""


class NotInjective(MPSDriveError):
    """The block map does not have full rank chi**2."""


class IllConditioned(MPSDriveError):
    """A matrix that must be inverted is numerically singular."""


class ResourceLimit(MPSDriveError):
    """A dense object would exceed the configured size cap."""


class WeightSumViolation(MPSDriveError):
    """Derivative weights do not sum to one."""


class BasisMismatch(MPSDriveError):
    """A coefficient matrix does not match the complement basis."""


class Unsupported(MPSDriveError):
    """Operation is not defined for this physical dimension."""


class DomainError(MPSDriveError):
    """Argument outside the domain of a formula."""


class NotInjectiveOnLoop(MPSDriveError):
    """A trajectory passes through a non-injective point."""


class ParseError(MPSDriveError):
    """Trajectory file could not be parsed."""


class NotClosed(MPSDriveError):
    """Trajectory end point does not match its start point."""


class NonUniformGrid(MPSDriveError):
    """Sampled trajectory is not on a uniform time grid."""


class ToleranceNotMet(MPSDriveError):
    """Adaptive integrator hit its step floor or step cap."""


class NotUnitary(MPSDriveError):
    """Matrix is not unitary to the required tolerance."""


class DegenerateSpacing(UserWarning):
    """Two quasi-energies coincide; the affected ratios are excluded."""


class NonImaginaryOverlap(UserWarning):
    """Gauge overlap has a real part: the parametrization changes the norm."""
