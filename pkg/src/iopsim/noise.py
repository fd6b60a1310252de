"""Receiver noise: thermal floor plus molecular absorption noise.

Absorption noise follows an emissivity model: a path that absorbs a fraction
``1 - tau`` of the power re-radiates ``k_B T0 (1 - tau)`` per hertz. ``tau``
is the absorption-only transmissivity of the dominant path (spreading
excluded), or of the most absorbing path in ``"worst"`` mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import BOLTZMANN, DEFAULT_TEMPERATURE, db_to_linear
from .errors import ConfigError, DomainError
from .geometry import PATH_ORDER, LayerStack, Placement
from .propagation import DEFAULT_MODEL, PropagationModel, batch_path_losses

NOISE_MODES = ("dominant", "worst")


@dataclass(frozen=True)
class NoisePsd:
    frequencies: np.ndarray
    psd: np.ndarray  # W/Hz
    thermal: np.ndarray
    molecular: np.ndarray


def thermal_noise_psd(T0=DEFAULT_TEMPERATURE, noise_figure_db=0.0):
    if not T0 > 0:
        raise DomainError("temperature must be positive")
    return BOLTZMANN * T0 * float(db_to_linear(noise_figure_db))


def molecular_noise_psd(path_transmissivity, T0=DEFAULT_TEMPERATURE):
    """Absorption noise PSD (W/Hz) for a path with the given transmissivity."""
    tau = np.asarray(path_transmissivity, dtype=float)
    if np.any(tau <= 0) or np.any(tau > 1):
        raise DomainError("transmissivity must lie in (0, 1]")
    if not T0 > 0:
        raise DomainError("temperature must be positive")
    out = BOLTZMANN * T0 * (1.0 - tau)
    return out if out.ndim else float(out)


def absorption_transmissivity(losses, mode="dominant"):
    """Transmissivity ``(P, F)`` from a batch of path losses.

    ``losses`` is the mapping returned by :func:`batch_path_losses`.
    """
    if mode not in NOISE_MODES:
        raise ConfigError(f"noise mode must be one of {NOISE_MODES}")
    totals = np.stack([losses[k].total_db for k in PATH_ORDER])
    absorb = np.stack([np.where(np.isfinite(losses[k].total_db), losses[k].absorption_db, -np.inf) for k in PATH_ORDER])
    if mode == "dominant":
        idx = np.argmin(totals, axis=0)  # first minimum = fixed tie-break order
        absorption_db = np.take_along_axis(absorb, idx[None], axis=0)[0]
    else:
        absorption_db = absorb.max(axis=0)
    return 10.0 ** (-absorption_db / 10.0)


def noise_from_transmissivity(grid, tau, T0=DEFAULT_TEMPERATURE, noise_figure_db=0.0) -> NoisePsd:
    thermal = np.full(np.shape(tau), thermal_noise_psd(T0, noise_figure_db))
    # clip so numerically total absorption (tau -> 0 in float) stays in the domain
    molecular = molecular_noise_psd(np.clip(tau, np.finfo(float).tiny, 1.0), T0) + np.zeros(np.shape(tau))
    return NoisePsd(np.asarray(grid, dtype=float), thermal + molecular, thermal, molecular)


def total_noise_psd(
    grid,
    placement: Placement,
    stack: LayerStack,
    T0=DEFAULT_TEMPERATURE,
    model: PropagationModel = DEFAULT_MODEL,
    mode: str = "dominant",
    noise_figure_db: float = 0.0,
) -> NoisePsd:
    """Noise PSD at the receiver of one link across ``grid``."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    placement.check(stack)
    losses = batch_path_losses([placement.h_t], [placement.h_r], [placement.rho_D], grid, stack, model)
    tau = absorption_transmissivity(losses, mode)[0]
    return noise_from_transmissivity(grid, tau, T0, noise_figure_db)
