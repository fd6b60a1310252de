"""Monte Carlo connectivity of dense paint-embedded device populations.

Each trial draws a Poisson number of devices uniformly over the wall, with
uniform burial depths and uniformly random antenna orientations, links every
pair whose band-averaged SNR (or capacity) passes the link rule, and records
degree and component statistics. Trial ``i`` draws from its own stream seeded
by ``(seed, i)``, so serial and parallel runs agree exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .capacity import DEFAULT_BAND, DEFAULT_TX_PSD, batch_link_capacity
from .errors import ConfigError, DegeneratePairError
from .geometry import LayerStack
from .propagation import DEFAULT_MODEL, PropagationModel

PAIR_CHUNK = 4096


@dataclass(frozen=True)
class Isotropic:
    def gain_db(self, boresight, direction):
        return np.zeros(np.shape(direction)[:-1])

    @property
    def peak_gain_db(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Cone:
    """Directional antenna: boresight gain with Gaussian roll-off reaching
    -20 dB relative to boresight at half the beamwidth off axis."""

    beamwidth: float  # radians, full width
    boresight_gain_dbi: float = 10.0

    def __post_init__(self):
        if not 0 < self.beamwidth <= math.pi:
            raise ConfigError("beamwidth must lie in (0, pi]")

    def gain_db(self, boresight, direction):
        unit = direction / np.linalg.norm(direction, axis=-1, keepdims=True)
        psi = np.arccos(np.clip(np.sum(boresight * unit, axis=-1), -1.0, 1.0))
        return self.boresight_gain_dbi - 20.0 * (psi / (0.5 * self.beamwidth)) ** 2

    @property
    def peak_gain_db(self) -> float:
        return self.boresight_gain_dbi


@dataclass(frozen=True)
class SnrThreshold:
    db: float

    def admits(self, snr_db, capacity):
        return snr_db >= self.db


@dataclass(frozen=True)
class MinCapacity:
    bps: float

    def admits(self, snr_db, capacity):
        return capacity >= self.bps


@dataclass(frozen=True)
class NetworkConfig:
    wall_size: tuple[float, float]  # m x m
    density: float  # devices per m^2
    stack: LayerStack
    orientation: Isotropic | Cone = field(default_factory=Isotropic)
    link_rule: SnrThreshold | MinCapacity = field(default_factory=lambda: SnrThreshold(0.0))
    trials: int = 100
    seed: int = 0
    max_range: float = 0.1
    band: tuple[float, float] = DEFAULT_BAND
    n_subbands: int = 32
    tx_psd: float = DEFAULT_TX_PSD
    model: PropagationModel = DEFAULT_MODEL

    def __post_init__(self):
        if not (self.wall_size[0] > 0 and self.wall_size[1] > 0):
            raise ConfigError("wall dimensions must be positive")
        if not self.density >= 0:
            raise ConfigError("density must be non-negative")
        if int(self.trials) < 1:
            raise ConfigError("need at least one trial")
        if not self.max_range > 0:
            raise ConfigError("max_range must be positive")

    @property
    def area(self) -> float:
        return self.wall_size[0] * self.wall_size[1]


@dataclass(frozen=True)
class NetworkRealization:
    positions: np.ndarray  # (N, 2) wall-plane coordinates, m
    depths: np.ndarray  # (N,) burial depth, m
    orientations: np.ndarray  # (N, 3) unit boresight vectors

    def __len__(self):
        return len(self.depths)


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(trial_index)]))


def sample_network(cfg: NetworkConfig, trial_index: int) -> NetworkRealization:
    rng = _trial_rng(cfg.seed, trial_index)
    n = int(rng.poisson(cfg.density * cfg.area))
    positions = rng.random((n, 2)) * np.asarray(cfg.wall_size)
    # shift off zero so depths lie strictly inside (0, T)
    depths = (rng.random(n) + 2.0**-54) * cfg.stack.paint_thickness
    vec = rng.standard_normal((n, 3))
    norms = np.linalg.norm(vec, axis=1, keepdims=True)
    orientations = vec / np.where(norms > 0, norms, 1.0)
    return NetworkRealization(positions, depths, orientations)


def _pair_vectors(real: NetworkRealization, i, j):
    d_xy = real.positions[j] - real.positions[i]
    d_z = (real.depths[j] - real.depths[i])[..., None]
    return np.concatenate([d_xy, d_z], axis=-1)


def evaluate_pairs(real: NetworkRealization, pairs, cfg: NetworkConfig):
    """Band-averaged SNR (dB) and capacity (bits/s) for index pairs ``(K, 2)``."""
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    snr_db = np.empty(len(pairs))
    capacity = np.empty(len(pairs))
    for start in range(0, len(pairs), PAIR_CHUNK):
        i, j = pairs[start:start + PAIR_CHUNK].T
        rho = np.hypot(*(real.positions[j] - real.positions[i]).T)
        if np.any(rho <= 0):
            raise DegeneratePairError("devices share a wall-plane position")
        vec = _pair_vectors(real, i, j)
        gain = cfg.orientation.gain_db(real.orientations[i], vec) + cfg.orientation.gain_db(real.orientations[j], -vec)
        *_, snr, caps = batch_link_capacity(
            real.depths[i], real.depths[j], rho, cfg.stack, cfg.band, cfg.n_subbands, cfg.tx_psd, cfg.model,
            gain_db=gain,
        )
        snr_db[start:start + len(i)] = 10.0 * np.log10(snr.mean(axis=1))
        capacity[start:start + len(i)] = caps.sum(axis=1)
    return snr_db, capacity


@dataclass(frozen=True)
class PairLink:
    snr_db: float
    capacity: float


def pair_link(real: NetworkRealization, a: int, b: int, cfg: NetworkConfig) -> PairLink:
    if a == b:
        raise DegeneratePairError("a device cannot link to itself")
    snr_db, capacity = evaluate_pairs(real, [(a, b)], cfg)
    return PairLink(float(snr_db[0]), float(capacity[0]))


def candidate_pairs(real: NetworkRealization, max_range: float) -> np.ndarray:
    """Sorted index pairs ``i < j`` within ``max_range`` on the wall plane."""
    if len(real) < 2:
        return np.empty((0, 2), dtype=int)
    pairs = cKDTree(real.positions).query_pairs(max_range, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=int)
    pairs = np.sort(pairs, axis=1)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def network_edges(real: NetworkRealization, cfg: NetworkConfig) -> np.ndarray:
    pairs = candidate_pairs(real, cfg.max_range)
    if len(pairs) == 0:
        return pairs
    snr_db, capacity = evaluate_pairs(real, pairs, cfg)
    return pairs[cfg.link_rule.admits(snr_db, capacity)]


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def component_sizes(self) -> list[int]:
        return [self.size[i] for i in range(len(self.parent)) if self.parent[i] == i]


@dataclass(frozen=True)
class TrialStats:
    n_devices: int
    n_edges: int
    mean_degree: float
    largest_component_fraction: float
    isolated_fraction: float


def trial_stats(n: int, edges) -> TrialStats:
    if n == 0:
        return TrialStats(0, 0, 0.0, 0.0, 0.0)
    uf = UnionFind(n)
    degree = np.zeros(n, dtype=int)
    for a, b in edges:
        uf.union(int(a), int(b))
        degree[a] += 1
        degree[b] += 1
    return TrialStats(
        n_devices=n,
        n_edges=len(edges),
        mean_degree=2.0 * len(edges) / n,
        largest_component_fraction=max(uf.component_sizes()) / n,
        isolated_fraction=float(np.count_nonzero(degree == 0)) / n,
    )


def run_trial(cfg: NetworkConfig, trial_index: int) -> TrialStats:
    real = sample_network(cfg, trial_index)
    return trial_stats(len(real), network_edges(real, cfg))


METRICS = ("mean_degree", "largest_component_fraction", "isolated_fraction")


@dataclass(frozen=True)
class ConnectivityReport:
    trials: tuple[TrialStats, ...]

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(t, metric) for t in self.trials])

    def mean(self, metric: str) -> float:
        return float(self.values(metric).mean())

    def std(self, metric: str) -> float:
        vals = self.values(metric)
        return float(vals.std(ddof=1)) if len(vals) > 1 else 0.0

    @property
    def mean_degree(self) -> float:
        return self.mean("mean_degree")

    @property
    def largest_component_fraction(self) -> float:
        return self.mean("largest_component_fraction")

    @property
    def isolated_fraction(self) -> float:
        return self.mean("isolated_fraction")

    def summary(self) -> dict:
        out = {"trials": len(self.trials), "mean_devices": self.mean("n_devices")}
        for metric in METRICS:
            out[f"{metric}_mean"] = self.mean(metric)
            out[f"{metric}_std"] = self.std(metric)
        return out


def cutoff_margin_db(cfg: NetworkConfig, n_depths: int = 12) -> float:
    """Best-case SNR at the cutoff range, relative to the link threshold.

    Evaluates equal and unequal depth pairs at ``max_range`` with peak antenna
    gain at both ends. For a capacity rule the threshold proxy is the flat SNR
    that would deliver the minimum capacity over the band. Negative means no link can reach the cutoff.
    """
    T = cfg.stack.paint_thickness
    depths = T * np.geomspace(1e-3, 1.0 - 1e-3, n_depths)
    h_t, h_r = (a.ravel() for a in np.meshgrid(depths, depths))
    *_, snr, caps = batch_link_capacity(
        h_t, h_r, np.full(h_t.shape, cfg.max_range), cfg.stack, cfg.band, cfg.n_subbands, cfg.tx_psd, cfg.model,
        gain_db=2.0 * cfg.orientation.peak_gain_db,
    )
    best_snr_db = float(np.max(10.0 * np.log10(snr.mean(axis=1))))
    rule = cfg.link_rule
    if isinstance(rule, SnrThreshold):
        threshold = rule.db
    else:
        width = cfg.band[1] - cfg.band[0]
        threshold = 10.0 * math.log10(2.0 ** (rule.bps / width) - 1.0) if rule.bps > 0 else -math.inf
    return best_snr_db - threshold


def check_cutoff(cfg: NetworkConfig) -> None:
    """Raise if a link could still pass the rule within 10 dB at the cutoff."""
    margin = cutoff_margin_db(cfg)
    if margin >= -10.0:
        raise ConfigError(
            f"max_range {cfg.max_range:g} m is too short: best-case SNR there is {margin:+.1f} dB from the threshold"
        )


def connectivity(cfg: NetworkConfig, workers: int = 1) -> ConnectivityReport:
    """Run all trials; the report does not depend on ``workers``."""
    check_cutoff(cfg)
    indices = range(int(cfg.trials))
    if workers <= 1:
        stats = [run_trial(cfg, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(run_trial, [cfg] * len(indices), indices, chunksize=8))
    return ConnectivityReport(tuple(stats))
