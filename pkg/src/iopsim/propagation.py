"""Path loss and channel response for the five paint-layer paths.

Loss components, in dB:

* spreading: spherical spreading with the in-medium wavelength. Direct and
  reflected waves spread over their whole (image) length inside paint. A
  lateral wave spreads over its interface run only, with a configurable power
  exponent (2 by default), plus a fixed excitation/extraction coupling loss
  per interface. Spreading never goes negative (near-field clamp).
* absorption: ``4.3429 * alpha * length`` summed per segment.
* reflection: ``-20 log10 |Gamma|`` for reflected waves, zero under total
  internal reflection.
* roughness: coherent Beckmann attenuation at each interface contact.

Every loss function broadcasts: the batched kernel evaluates arrays of
placements (shape ``(P, 1)``) against frequency grids (shape ``(F,)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .constants import DB_PER_NEPER_POWER, SPEED_OF_LIGHT
from .errors import ConfigError, InfeasiblePathError
from .geometry import (
    KIND_INTERFACE,
    PATH_ORDER,
    Interface,
    LayerStack,
    PathGeometry,
    PathKind,
    Placement,
    direct_length,
    lateral_lengths,
    path_geometry,
    reflected_lengths,
)

POLARIZATIONS = ("TE", "TM", "average")
COMBINE_MODES = ("noncoherent", "coherent")

# Lateral excitation + extraction coupling (dB), fitted by
# iopsim.calibration.calibrate_coupling; refreshed by `iopsim calibrate`.
LATERAL_COUPLING_AP_DB = 27.805751087512995
LATERAL_COUPLING_PP_DB = 9.6163298175709


@dataclass(frozen=True)
class PropagationModel:
    """Tunable assumptions of the channel model."""

    polarization: str = "TE"
    lateral_exponent: float = 2.0
    lateral_coupling_db: Mapping[str, float] = field(
        default_factory=lambda: {"A-P": LATERAL_COUPLING_AP_DB, "P-P": LATERAL_COUPLING_PP_DB}
    )

    def __post_init__(self):
        if self.polarization not in POLARIZATIONS:
            raise ConfigError(f"polarization must be one of {POLARIZATIONS}")
        if not self.lateral_exponent > 0:
            raise ConfigError("lateral exponent must be positive")
        coupling = {Interface(k).value: float(v) for k, v in self.lateral_coupling_db.items()}
        for iface in Interface:
            coupling.setdefault(iface.value, 0.0)
        object.__setattr__(self, "lateral_coupling_db", coupling)

    def coupling(self, interface: Interface) -> float:
        return self.lateral_coupling_db[Interface(interface).value]

    def replace(self, **changes) -> "PropagationModel":
        fields = dict(
            polarization=self.polarization,
            lateral_exponent=self.lateral_exponent,
            lateral_coupling_db=dict(self.lateral_coupling_db),
        )
        fields.update(changes)
        return PropagationModel(**fields)


DEFAULT_MODEL = PropagationModel()


@dataclass(frozen=True)
class PathLoss:
    """Per-path loss decomposition; fields are floats or broadcast arrays."""

    kind: PathKind
    spreading_db: object
    absorption_db: object
    reflection_db: object
    roughness_db: object
    total_db: object


@dataclass(frozen=True)
class ChannelResponse:
    frequencies: np.ndarray
    per_path_gain: dict
    total_gain: np.ndarray


def spreading_loss(d, f, n=1.0):
    """Spherical spreading loss ``20 log10(4 pi d f n / c)`` in dB."""
    return 20.0 * np.log10(4.0 * math.pi * np.asarray(d, dtype=float) * f * n / SPEED_OF_LIGHT)


def absorption_loss(d, alpha):
    return DB_PER_NEPER_POWER * np.asarray(alpha, dtype=float) * d


def fresnel_magnitude(n1, n2, theta_i, pol="TE"):
    """|Gamma| for a wave in ``n1`` hitting ``n2`` at ``theta_i`` from the normal.

    ``pol="average"`` returns the RMS of the TE and TM magnitudes. Beyond the
    critical angle the magnitude is exactly 1.
    """
    if pol not in POLARIZATIONS:
        raise ConfigError(f"polarization must be one of {POLARIZATIONS}")
    theta = np.asarray(theta_i, dtype=float)
    cos_i = np.cos(theta)
    sin_t = n1 / n2 * np.sin(theta)
    cos_t = np.sqrt((1.0 - sin_t**2).astype(complex))
    te = np.abs((n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t))
    tm = np.abs((n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t))
    mag = {"TE": te, "TM": tm}.get(pol)
    if mag is None:
        mag = np.sqrt(0.5 * (te**2 + tm**2))
    mag = np.where(sin_t >= 1.0, 1.0, np.minimum(mag, 1.0))
    return mag if mag.ndim else float(mag)


def roughness_factor(sigma, lambda_medium, theta_i):
    """Coherent roughness attenuation ``-10 log10(exp(-g^2 / 2))`` in dB, with
    ``g = 4 pi sigma cos(theta_i) / lambda``."""
    g = 4.0 * math.pi * np.asarray(sigma, dtype=float) * np.cos(theta_i) / lambda_medium
    return DB_PER_NEPER_POWER * g**2 / 2.0


def lateral_spreading(run, f, n, exponent=2.0):
    """Power-law spreading over a lateral run; Friis form at ``exponent=2``."""
    return 10.0 * exponent * np.log10(4.0 * math.pi * np.asarray(run, dtype=float) * f * n / SPEED_OF_LIGHT)


def _losses(kind, paint_len, run_len, theta, f, stack: LayerStack, model: PropagationModel) -> PathLoss:
    """Loss components from a path descriptor.

    ``paint_len`` is the total length inside paint, ``run_len`` the interface
    run in the second medium (lateral kinds), ``theta`` the incidence angle.
    """
    kind = PathKind(kind)
    paint = stack.paint
    n_p = paint.refractive_index
    zero = np.zeros(np.broadcast_shapes(np.shape(paint_len), np.shape(f)))
    absorption = absorption_loss(paint_len, paint.alpha(f))
    reflection = zero
    roughness = zero
    if kind is PathKind.DW:
        spreading = spreading_loss(paint_len, f, n_p)
    else:
        interface = KIND_INTERFACE[kind]
        rare = stack.rare_medium(interface)
        sigma = paint.roughness_rms if interface is Interface.AIR_PAINT else rare.roughness_rms
        rough_one = roughness_factor(sigma, paint.wavelength(f), theta)
        if kind in (PathKind.RW_A, PathKind.RW_P):
            spreading = spreading_loss(paint_len, f, n_p)
            gamma = fresnel_magnitude(n_p, rare.refractive_index, theta, model.polarization)
            reflection = zero + (-20.0 * np.log10(gamma))
            roughness = zero + rough_one
        else:
            spreading = lateral_spreading(run_len, f, rare.refractive_index, model.lateral_exponent)
            spreading = spreading + model.coupling(interface)
            absorption = absorption + absorption_loss(run_len, rare.alpha(f))
            roughness = zero + 2.0 * rough_one  # excitation and extraction
    spreading = np.maximum(spreading, 0.0) + zero
    absorption = absorption + zero
    total = spreading + absorption + reflection + roughness
    if total.ndim == 0:
        spreading, absorption, reflection, roughness, total = (
            float(x) for x in (spreading, absorption, reflection, roughness, total)
        )
    return PathLoss(kind, spreading, absorption, reflection, roughness, total)


def path_loss(pg: PathGeometry, stack: LayerStack, f, model: PropagationModel = DEFAULT_MODEL) -> PathLoss:
    """Loss of one path at frequency ``f`` (scalar or array)."""
    paint_len = sum(s.length for s in pg.segments if s.medium == "paint")
    run_len = sum(s.length for s in pg.segments if s.medium != "paint")
    return _losses(pg.kind, paint_len, run_len, pg.incidence_angle or 0.0, np.asarray(f, dtype=float), stack, model)


def batch_path_losses(h_t, h_r, rho, f, stack: LayerStack, model: PropagationModel = DEFAULT_MODEL):
    """Losses of all five kinds for arrays of placements.

    ``h_t``, ``h_r``, ``rho`` are 1-D arrays of length P; ``f`` is 1-D of
    length F. Returns ``{kind: PathLoss}`` with ``(P, F)`` arrays. Infeasible
    lateral paths get ``total_db = inf``.
    """
    h_t = np.asarray(h_t, dtype=float)[:, None]
    h_r = np.asarray(h_r, dtype=float)[:, None]
    rho = np.asarray(rho, dtype=float)[:, None]
    f = np.asarray(f, dtype=float)
    T = stack.paint_thickness
    out = {}
    out[PathKind.DW] = _losses(PathKind.DW, direct_length(h_t, h_r, rho), 0.0, 0.0, f, stack, model)
    for kind, d_t, d_r in (
        (PathKind.RW_A, h_t, h_r),
        (PathKind.RW_P, T - h_t, T - h_r),
    ):
        length, theta = reflected_lengths(d_t, d_r, rho)
        out[kind] = _losses(kind, length, 0.0, theta, f, stack, model)
    for kind, d_t, d_r in (
        (PathKind.LW_A, h_t, h_r),
        (PathKind.LW_P, T - h_t, T - h_r),
    ):
        theta_c = stack.critical_angle(KIND_INTERFACE[kind])
        s_t, s_r, run = lateral_lengths(d_t, d_r, rho, theta_c)
        feasible = run > 0
        loss = _losses(kind, s_t + s_r, np.where(feasible, run, 1.0), theta_c, f, stack, model)
        total = np.where(feasible, loss.total_db, np.inf)
        out[kind] = PathLoss(kind, loss.spreading_db, loss.absorption_db, loss.reflection_db, loss.roughness_db, total)
    return out


def _phase_lengths(h_t, h_r, rho, stack: LayerStack):
    """Electrical (index-weighted) lengths per kind, for coherent combining."""
    n_p = stack.paint.refractive_index
    T = stack.paint_thickness
    out = {PathKind.DW: n_p * direct_length(h_t, h_r, rho)}
    out[PathKind.RW_A] = n_p * reflected_lengths(h_t, h_r, rho)[0]
    out[PathKind.RW_P] = n_p * reflected_lengths(T - h_t, T - h_r, rho)[0]
    for kind, d_t, d_r in ((PathKind.LW_A, h_t, h_r), (PathKind.LW_P, T - h_t, T - h_r)):
        rare = stack.rare_medium(KIND_INTERFACE[kind])
        s_t, s_r, run = lateral_lengths(d_t, d_r, rho, stack.critical_angle(KIND_INTERFACE[kind]))
        out[kind] = n_p * (s_t + s_r) + rare.refractive_index * run
    return out


def combine_gains(per_path: Mapping[PathKind, np.ndarray], f, combine="noncoherent", electrical_lengths=None):
    """Total power gain from per-path gains, summed in fixed kind order."""
    if combine not in COMBINE_MODES:
        raise ConfigError(f"combine must be one of {COMBINE_MODES}")
    if combine == "noncoherent":
        total = np.zeros_like(next(iter(per_path.values())))
        for kind in PATH_ORDER:
            total = total + per_path[kind]
        return total
    phasor = 0j
    for kind in PATH_ORDER:
        phase = 2.0 * math.pi * np.asarray(f) * electrical_lengths[kind] / SPEED_OF_LIGHT
        phasor = phasor + np.sqrt(per_path[kind]) * np.exp(-1j * phase)
    return np.abs(phasor) ** 2


def batch_channel_gains(h_t, h_r, rho, grid, stack, model=DEFAULT_MODEL, combine="noncoherent"):
    """Per-path and total power gains, each ``(P, F)``."""
    losses = batch_path_losses(h_t, h_r, rho, grid, stack, model)
    per_path = {kind: 10.0 ** (-losses[kind].total_db / 10.0) for kind in PATH_ORDER}
    lengths = None
    if combine == "coherent":
        h_t, h_r, rho = (np.asarray(x, dtype=float)[:, None] for x in (h_t, h_r, rho))
        lengths = _phase_lengths(h_t, h_r, rho, stack)
        lengths = {k: np.where(np.isfinite(losses[k].total_db), v, 0.0) for k, v in lengths.items()}
    return per_path, combine_gains(per_path, np.asarray(grid, dtype=float), combine, lengths), losses


def channel_response(
    p: Placement,
    stack: LayerStack,
    grid,
    model: PropagationModel = DEFAULT_MODEL,
    combine: str = "noncoherent",
) -> ChannelResponse:
    """Per-path and total power gain of one link across a frequency grid."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("frequency grid must be non-empty and strictly ascending")
    p.check(stack)
    per_path, total, _ = batch_channel_gains([p.h_t], [p.h_r], [p.rho_D], grid, stack, model, combine)
    return ChannelResponse(grid, {k: v[0] for k, v in per_path.items()}, total[0])


def all_path_losses(p: Placement, stack: LayerStack, f, model: PropagationModel = DEFAULT_MODEL):
    """``{kind: PathLoss}`` for every feasible path of one placement."""
    out = {}
    for kind in PATH_ORDER:
        try:
            pg = path_geometry(kind, p, stack)
        except InfeasiblePathError:
            continue
        out[kind] = path_loss(pg, stack, f, model)
    return out


def dominant_path(p: Placement, stack: LayerStack, f: float, model: PropagationModel = DEFAULT_MODEL) -> PathKind:
    """Kind with the smallest total loss; ties go to the earlier kind."""
    losses = all_path_losses(p, stack, float(f), model)
    best = min(losses.values(), key=lambda pl: (pl.total_db, PATH_ORDER.index(pl.kind)))
    return best.kind
