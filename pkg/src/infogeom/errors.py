"""Exception types shared across the package."""


class InfoGeomError(Exception):
    """Base class for all package-specific errors."""


class DomainError(InfoGeomError):
    """Natural parameter lies outside the family's declared domain."""


class AbsoluteContinuityError(InfoGeomError):
    """Radon-Nikodym derivative requested where it does not exist."""


class RankError(InfoGeomError):
    """A matrix that must be non-singular is numerically degenerate."""


class SupportBlowupError(InfoGeomError):
    """Exact convolution support exceeded the configured cap."""


class BasePointMismatchError(InfoGeomError):
    """Tangent vectors at different base points were combined."""


class PreconditionError(InfoGeomError):
    """A documented caller obligation was violated."""


class UnknownFamilyError(InfoGeomError):
    """Family name not present in the registry."""


class BadParamError(InfoGeomError):
    """Family parameter missing, malformed, or out of range."""
