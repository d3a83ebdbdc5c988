"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all cgolab errors."""


class GridError(LabError):
    """Grid too small for a stencil, or mismatched grids."""


class ConvergenceError(LabError):
    """An iterative path failed to reach its tolerance.

    Carries the last measured residual in ``residual`` when available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(LabError):
    """A series or fixed-point iteration was detected to diverge."""


class SingularSystemError(LabError):
    """A discrete linear system is numerically singular."""


class OverflowGuardError(LabError):
    """An exponential weight would leave double range; normalize first."""


class ConfigError(LabError):
    """A scenario configuration failed validation."""
