"""Terahertz channel and connectivity simulator for transceivers buried in a paint layer."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CalibrationError,
    ConfigError,
    DegeneratePairError,
    DomainError,
    InfeasiblePathError,
    IoPError,
    ModelError,
)
from .geometry import LayerStack, PathKind, Placement  # noqa: E402
from .materials import MaterialDb, MediumSpec  # noqa: E402
from .propagation import DEFAULT_MODEL, PropagationModel, path_loss  # noqa: E402

__all__ = [
    "__version__",
    "CalibrationError",
    "ConfigError",
    "DegeneratePairError",
    "DomainError",
    "InfeasiblePathError",
    "IoPError",
    "ModelError",
    "LayerStack",
    "PathKind",
    "Placement",
    "MaterialDb",
    "MediumSpec",
    "DEFAULT_MODEL",
    "PropagationModel",
    "path_loss",
]
