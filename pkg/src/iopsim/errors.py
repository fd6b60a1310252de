"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`IoPError`,
so the CLI can map families of failures to exit codes.
"""


class IoPError(Exception):
    """Base class for all package errors."""


class DomainError(IoPError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(IoPError, ValueError):
    """Invalid configuration, material file or missing material."""


class ModelError(IoPError):
    """The physical model cannot produce a result for the given inputs."""


class InfeasiblePathError(ModelError):
    """A lateral path has a non-positive interface run."""


class CalibrationError(ModelError):
    """Calibration targets are inconsistent with the model."""


class DegeneratePairError(ModelError):
    """Two devices share a wall-plane position."""
