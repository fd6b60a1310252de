"""Three-layer stack geometry and the five canonical ray paths.

The stack is air above a paint layer of thickness ``T`` above plaster. Depths
are measured downward from the air-paint interface. Reflected paths use the
mirror-image construction (first-order only); lateral paths leave the
transmitter at the critical angle, run along the interface in the rarer
medium, and re-enter the paint at the critical angle.

The ``*_lengths`` helpers are plain numpy expressions so the batched channel
kernel in :mod:`iopsim.propagation` shares the exact same formulas.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, InfeasiblePathError
from .materials import MaterialDb, MediumSpec


class PathKind(str, enum.Enum):
    DW = "DW"
    RW_A = "RW-A"
    RW_P = "RW-P"
    LW_A = "LW-A"
    LW_P = "LW-P"

    def __str__(self):
        return self.value


# Fixed evaluation and tie-break order.
PATH_ORDER = (PathKind.DW, PathKind.RW_A, PathKind.RW_P, PathKind.LW_A, PathKind.LW_P)


class Interface(str, enum.Enum):
    AIR_PAINT = "A-P"
    PAINT_PLASTER = "P-P"


REFLECTED_KIND = {Interface.AIR_PAINT: PathKind.RW_A, Interface.PAINT_PLASTER: PathKind.RW_P}
LATERAL_KIND = {Interface.AIR_PAINT: PathKind.LW_A, Interface.PAINT_PLASTER: PathKind.LW_P}
KIND_INTERFACE = {
    PathKind.RW_A: Interface.AIR_PAINT,
    PathKind.LW_A: Interface.AIR_PAINT,
    PathKind.RW_P: Interface.PAINT_PLASTER,
    PathKind.LW_P: Interface.PAINT_PLASTER,
}


@dataclass(frozen=True)
class LayerStack:
    paint_thickness: float
    air: MediumSpec
    paint: MediumSpec
    plaster: MediumSpec

    def __post_init__(self):
        if not self.paint_thickness > 0:
            raise ConfigError("paint thickness must be positive")
        n_p = self.paint.refractive_index
        if not (n_p > self.air.refractive_index and n_p > self.plaster.refractive_index):
            raise ConfigError("paint must be optically denser than both air and plaster")

    @classmethod
    def from_db(
        cls,
        db: MaterialDb,
        paint_thickness: float = 2e-3,
        paint: str = "titanium-white-paint",
        plaster: str = "plaster",
        air: str = "air",
    ) -> "LayerStack":
        return cls(paint_thickness, db[air], db[paint], db[plaster])

    def medium(self, role: str) -> MediumSpec:
        """Medium for a layer role: ``"air"``, ``"paint"`` or ``"plaster"``."""
        if role not in ("air", "paint", "plaster"):
            raise ConfigError(f"unknown layer role {role!r}")
        return getattr(self, role)

    def rare_medium(self, interface: Interface) -> MediumSpec:
        return self.air if Interface(interface) is Interface.AIR_PAINT else self.plaster

    def critical_angle(self, interface: Interface) -> float:
        return critical_angle(self.paint.refractive_index, self.rare_medium(interface).refractive_index)


@dataclass(frozen=True)
class Placement:
    """Transmitter/receiver depths below the air-paint interface and their
    horizontal separation, all in meters."""

    h_t: float
    h_r: float
    rho_D: float

    def __post_init__(self):
        if not (self.h_t > 0 and self.h_r > 0):
            raise ConfigError("burial depths must be positive")
        if not self.rho_D > 0:
            raise ConfigError("horizontal separation must be positive")

    @property
    def elevation(self) -> float:
        return math.atan2(self.h_t - self.h_r, self.rho_D)

    def check(self, stack: LayerStack) -> None:
        T = stack.paint_thickness
        if not (self.h_t < T and self.h_r < T):
            raise ConfigError(f"burial depths must lie inside the {T:g} m paint layer")

    def depths_to(self, interface: Interface, stack: LayerStack) -> tuple[float, float]:
        if Interface(interface) is Interface.AIR_PAINT:
            return self.h_t, self.h_r
        T = stack.paint_thickness
        return T - self.h_t, T - self.h_r

    def swapped(self) -> "Placement":
        return Placement(self.h_r, self.h_t, self.rho_D)


@dataclass(frozen=True)
class Segment:
    medium: str  # layer role
    length: float


@dataclass(frozen=True)
class PathGeometry:
    kind: PathKind
    segments: tuple[Segment, ...]
    incidence_angle: float | None = None

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)


def critical_angle(n_dense: float, n_rare: float) -> float:
    """Critical angle (radians from the normal) for light leaving ``n_dense``."""
    if not (n_rare > 0 and n_dense > n_rare):
        raise DomainError(f"no critical angle for n_dense={n_dense}, n_rare={n_rare}")
    return math.asin(n_rare / n_dense)


def direct_length(h_t, h_r, rho):
    return np.hypot(rho, np.subtract(h_t, h_r))


def reflected_lengths(d_t, d_r, rho):
    """Image-path length and incidence angle for depths measured to the mirror."""
    depth_sum = np.add(d_t, d_r)
    return np.hypot(rho, depth_sum), np.arctan2(rho, depth_sum)


def lateral_lengths(d_t, d_r, rho, theta_c):
    """Slant lengths (tx, rx) and the interface run of a lateral path."""
    cos_c = math.cos(theta_c)
    run = np.subtract(rho, np.add(d_t, d_r) * math.tan(theta_c))
    return np.divide(d_t, cos_c), np.divide(d_r, cos_c), run


def direct_path(p: Placement) -> PathGeometry:
    return PathGeometry(PathKind.DW, (Segment("paint", float(direct_length(p.h_t, p.h_r, p.rho_D))),))


def reflected_path(p: Placement, stack: LayerStack, interface: Interface) -> PathGeometry:
    interface = Interface(interface)
    p.check(stack)
    d_t, d_r = p.depths_to(interface, stack)
    total, theta = reflected_lengths(d_t, d_r, p.rho_D)
    # split the image path at the reflection point
    first = float(total) * d_t / (d_t + d_r)
    segments = (Segment("paint", first), Segment("paint", float(total) - first))
    return PathGeometry(REFLECTED_KIND[interface], segments, float(theta))


def lateral_path(p: Placement, stack: LayerStack, interface: Interface) -> PathGeometry:
    interface = Interface(interface)
    p.check(stack)
    d_t, d_r = p.depths_to(interface, stack)
    theta_c = stack.critical_angle(interface)
    slant_t, slant_r, run = lateral_lengths(d_t, d_r, p.rho_D, theta_c)
    if not run > 0:
        need = (d_t + d_r) * math.tan(theta_c)
        raise InfeasiblePathError(
            f"{LATERAL_KIND[interface]} needs rho_D > {need:.6g} m, got {p.rho_D:.6g} m"
        )
    role = "air" if interface is Interface.AIR_PAINT else "plaster"
    segments = (Segment("paint", float(slant_t)), Segment(role, float(run)), Segment("paint", float(slant_r)))
    return PathGeometry(LATERAL_KIND[interface], segments, theta_c)


def path_geometry(kind: PathKind, p: Placement, stack: LayerStack) -> PathGeometry:
    kind = PathKind(kind)
    if kind is PathKind.DW:
        p.check(stack)
        return direct_path(p)
    if kind in (PathKind.RW_A, PathKind.RW_P):
        return reflected_path(p, stack, KIND_INTERFACE[kind])
    return lateral_path(p, stack, KIND_INTERFACE[kind])


def all_paths(p: Placement, stack: LayerStack) -> dict[PathKind, PathGeometry | None]:
    """All five paths in fixed order; infeasible lateral paths map to ``None``."""
    out = {}
    for kind in PATH_ORDER:
        try:
            out[kind] = path_geometry(kind, p, stack)
        except InfeasiblePathError:
            out[kind] = None
    return out
