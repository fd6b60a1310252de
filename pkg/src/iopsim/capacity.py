"""Sub-band aggregated Shannon capacity for paint links and the air baseline.

The band is split into equal sub-bands; each contributes
``df * log2(1 + S(f_i) g(f_i) / N(f_i))`` with the gain and noise sampled at
the sub-band centre.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .constants import DEFAULT_TEMPERATURE, db_to_linear
from .errors import ConfigError
from .geometry import LayerStack, Placement
from .materials import AIR, MaterialDb
from .noise import absorption_transmissivity, noise_from_transmissivity
from .propagation import DEFAULT_MODEL, PropagationModel, absorption_loss, batch_channel_gains, spreading_loss

DEFAULT_BAND = (200e9, 300e9)
DEFAULT_SUBBANDS = 256
DEFAULT_TX_PSD = 1e-14  # W/Hz, 1 mW spread over 100 GHz


@dataclass(frozen=True)
class LinkBudget:
    band: tuple[float, float]
    n_subbands: int
    tx_psd: float
    centers: np.ndarray
    gains: np.ndarray
    noise_psd: np.ndarray
    snr: np.ndarray
    capacities: np.ndarray  # bits/s per sub-band
    total_capacity: float

    @property
    def per_subband(self) -> list[tuple[float, float, float, float]]:
        return list(zip(*(a.tolist() for a in (self.centers, self.gains, self.snr, self.capacities))))

    @property
    def mean_snr_db(self) -> float:
        return float(10.0 * np.log10(np.mean(self.snr)))


def subband_centers(band, n_subbands):
    f_lo, f_hi = (float(x) for x in band)
    if not f_hi > f_lo > 0:
        raise ConfigError("band must satisfy f_hi > f_lo > 0")
    if int(n_subbands) < 1:
        raise ConfigError("need at least one sub-band")
    edges = np.linspace(f_lo, f_hi, int(n_subbands) + 1)
    return 0.5 * (edges[:-1] + edges[1:]), (f_hi - f_lo) / int(n_subbands)


def shannon(width, snr):
    return width * np.log2(1.0 + snr)


def batch_link_capacity(
    h_t,
    h_r,
    rho,
    stack: LayerStack,
    band=DEFAULT_BAND,
    n_subbands=DEFAULT_SUBBANDS,
    tx_psd=DEFAULT_TX_PSD,
    model: PropagationModel = DEFAULT_MODEL,
    combine="noncoherent",
    T0=DEFAULT_TEMPERATURE,
    noise_mode="dominant",
    gain_db=0.0,
    noise_figure_db=0.0,
):
    """Vectorised link budget for arrays of placements.

    Returns ``(centers, gain, noise_psd, snr, capacities)``; all but
    ``centers`` are ``(P, F)``. ``gain_db`` (scalar or ``(P,)``) adds antenna
    gain on top of the channel.
    """
    if not tx_psd > 0:
        raise ConfigError("transmit PSD must be positive")
    centers, width = subband_centers(band, n_subbands)
    _, total, losses = batch_channel_gains(h_t, h_r, rho, centers, stack, model, combine)
    gain = total * db_to_linear(np.asarray(gain_db, dtype=float).reshape(-1, 1))
    tau = absorption_transmissivity(losses, noise_mode)
    noise = noise_from_transmissivity(centers, tau, T0, noise_figure_db).psd
    snr = tx_psd * gain / noise
    caps = shannon(width, snr)
    return centers, gain, noise, snr, caps


def link_capacity(
    p: Placement,
    stack: LayerStack,
    band=DEFAULT_BAND,
    n_subbands: int = DEFAULT_SUBBANDS,
    tx_psd: float = DEFAULT_TX_PSD,
    model: PropagationModel = DEFAULT_MODEL,
    combine: str = "noncoherent",
    T0: float = DEFAULT_TEMPERATURE,
    noise_mode: str = "dominant",
    gain_db: float = 0.0,
) -> LinkBudget:
    """Multipath capacity of one paint link."""
    p.check(stack)
    centers, gain, noise, snr, caps = batch_link_capacity(
        [p.h_t], [p.h_r], [p.rho_D], stack, band, n_subbands, tx_psd, model, combine, T0, noise_mode, gain_db
    )
    return LinkBudget(
        tuple(band), int(n_subbands), tx_psd, centers, gain[0], noise[0], snr[0], caps[0], float(caps[0].sum())
    )


def air_capacity(
    distance: float,
    band=DEFAULT_BAND,
    n_subbands: int = DEFAULT_SUBBANDS,
    tx_psd: float = DEFAULT_TX_PSD,
    T0: float = DEFAULT_TEMPERATURE,
    air=AIR,
) -> LinkBudget:
    """Free-space baseline: Friis spreading plus atmospheric absorption."""
    if not distance > 0:
        raise ConfigError("distance must be positive")
    if not tx_psd > 0:
        raise ConfigError("transmit PSD must be positive")
    centers, width = subband_centers(band, n_subbands)
    absorption_db = absorption_loss(distance, air.alpha(centers))
    gain = 10.0 ** (-(np.maximum(spreading_loss(distance, centers, air.refractive_index), 0.0) + absorption_db) / 10.0)
    noise = noise_from_transmissivity(centers, 10.0 ** (-absorption_db / 10.0), T0).psd
    snr = tx_psd * gain / noise
    caps = shannon(width, snr)
    return LinkBudget(tuple(band), int(n_subbands), tx_psd, centers, gain, noise, snr, caps, float(caps.sum()))


@dataclass(frozen=True)
class LinkConfig:
    """Fixed parameters of a capacity sweep; equal burial depths."""

    rho_D: float = 0.02
    depth: float = 1e-3
    paint_thickness: float = 2e-3
    n_paint: float | None = None
    paint: str = "titanium-white-paint"
    plaster: str = "plaster"
    air: str = "air"
    band: tuple[float, float] = DEFAULT_BAND
    n_subbands: int = DEFAULT_SUBBANDS
    tx_psd: float = DEFAULT_TX_PSD
    combine: str = "noncoherent"

    @classmethod
    def from_overrides(cls, overrides: Mapping | None) -> "LinkConfig":
        overrides = dict(overrides or {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown link parameters: {sorted(unknown)}")
        if "band" in overrides:
            overrides["band"] = tuple(overrides["band"])
        return cls(**overrides)

    def stack(self, db: MaterialDb) -> LayerStack:
        paint = db[self.paint]
        if self.n_paint is not None:
            paint = dataclasses.replace(paint, refractive_index=float(self.n_paint))
        return LayerStack(self.paint_thickness, db[self.air], paint, db[self.plaster])


SWEEP_AXES = {"rho_D": "rho_D", "depth": "depth", "thickness": "paint_thickness", "n_paint": "n_paint"}


def capacity_sweep(
    axis: str,
    values: Sequence[float],
    config: LinkConfig | Mapping | None = None,
    db: MaterialDb | None = None,
    model: PropagationModel = DEFAULT_MODEL,
) -> list[dict]:
    """One summary row per sweep value, in input order."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {sorted(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise ConfigError("sweep range is empty")
    base = config if isinstance(config, LinkConfig) else LinkConfig.from_overrides(config)
    db = MaterialDb.presets() if db is None else db
    rows = []
    for value in values:
        cfg = dataclasses.replace(base, **{SWEEP_AXES[axis]: float(value)})
        stack = cfg.stack(db)
        budget = link_capacity(
            Placement(cfg.depth, cfg.depth, cfg.rho_D), stack, cfg.band, cfg.n_subbands, cfg.tx_psd, model, cfg.combine
        )
        rows.append(
            {
                "axis": axis,
                "value": float(value),
                "rho_D_m": cfg.rho_D,
                "depth_m": cfg.depth,
                "paint_thickness_m": cfg.paint_thickness,
                "n_paint": stack.paint.refractive_index,
                "capacity_bps": budget.total_capacity,
                "mean_snr_db": budget.mean_snr_db,
            }
        )
    return rows
