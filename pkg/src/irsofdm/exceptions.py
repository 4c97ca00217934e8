"""Exception types raised across the package."""


class IrsOfdmError(Exception):
    """Base class for all package errors."""


class ModelValidityError(IrsOfdmError, ValueError):
    """The response-curve coefficients give an amplitude outside (0, 1] in the band."""


class EstimationInfeasibleError(IrsOfdmError, ValueError):
    """A training matrix is singular or too ill-conditioned to solve against."""


class DesignInfeasibleError(IrsOfdmError, ValueError):
    """No feasible reflection pattern could be produced or the start point is infeasible."""


class ConfigError(IrsOfdmError, ValueError):
    """Malformed or inconsistent configuration."""
