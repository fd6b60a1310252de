"""Electromagnetic material descriptions and the material catalog.

A :class:`MediumSpec` carries the real refractive index, a power absorption
coefficient (constant or sampled over frequency) and the RMS roughness of the
interface the medium presents. :class:`MaterialDb` is an immutable name-keyed
catalog with a provenance tag per entry.

Material files are UTF-8 JSON (schema ``iop-materials/1``)::

    {
      "version": "iop-materials/1",
      "materials": [
        {"name": "plaster", "refractive_index": 1.73, "roughness_rms_m": 0.0,
         "absorption": {"constant_per_m": 100.0}},
        {"name": "lossy", "refractive_index": 1.5,
         "absorption": {"samples": [[2e11, 300.0], [3e11, 400.0]]}}
      ]
    }

A bare top-level array of material objects is accepted as well.
``roughness_rms_m`` is optional and defaults to 0.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import ConfigError, DomainError

FORMAT_VERSION = "iop-materials/1"

Absorption = Union[float, tuple[tuple[float, float], ...]]


@dataclass(frozen=True)
class MediumSpec:
    """Frequency-dependent description of one homogeneous medium.

    Attributes:
        name: Catalog name.
        refractive_index: Real part of the refractive index, >= 1.
        absorption: Either a constant power absorption coefficient in 1/m or a
            tuple of ``(frequency_hz, alpha_per_m)`` samples with strictly
            increasing frequencies.
        roughness_rms: RMS height in meters of the interface this medium
            presents to the paint layer.
    """

    name: str
    refractive_index: float
    absorption: Absorption = 0.0
    roughness_rms: float = 0.0

    def __post_init__(self):
        if not self.refractive_index >= 1.0:
            raise ConfigError(f"{self.name}: refractive index {self.refractive_index} < 1")
        if not self.roughness_rms >= 0.0:
            raise ConfigError(f"{self.name}: negative roughness {self.roughness_rms}")
        if isinstance(self.absorption, (int, float)):
            if not self.absorption >= 0.0:
                raise ConfigError(f"{self.name}: negative absorption {self.absorption}")
            object.__setattr__(self, "absorption", float(self.absorption))
            return
        samples = tuple((float(f), float(a)) for f, a in self.absorption)
        if not samples:
            raise ConfigError(f"{self.name}: empty absorption profile")
        freqs = [f for f, _ in samples]
        if any(f <= 0 for f in freqs) or any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ConfigError(f"{self.name}: sample frequencies must be positive and strictly increasing")
        if any(not a >= 0.0 for _, a in samples):
            raise ConfigError(f"{self.name}: negative absorption sample")
        object.__setattr__(self, "absorption", samples)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.absorption, float)

    def alpha(self, f):
        """Power absorption coefficient (1/m) at frequency ``f`` (scalar or array)."""
        return alpha_at(self, f).alpha

    def wavelength(self, f):
        """In-medium wavelength in meters."""
        return SPEED_OF_LIGHT / (np.asarray(f, dtype=float) * self.refractive_index)


class AlphaLookup(NamedTuple):
    alpha: float | np.ndarray
    extrapolated: bool


def alpha_at(medium: MediumSpec, f) -> AlphaLookup:
    """Absorption coefficient of ``medium`` at ``f``.

    Sampled profiles are interpolated linearly in (log f, alpha) and held
    constant beyond the sampled range; ``extrapolated`` reports whether any
    query frequency fell outside it.
    """
    f_arr = np.asarray(f, dtype=float)
    if medium.is_constant:
        value = np.full_like(f_arr, medium.absorption)
        return AlphaLookup(value if value.ndim else float(value), False)
    if not medium.absorption:
        raise ConfigError(f"{medium.name}: empty absorption profile")
    freqs = np.array([s[0] for s in medium.absorption])
    alphas = np.array([s[1] for s in medium.absorption])
    if np.any(f_arr <= 0):
        raise DomainError("frequency must be positive")
    out = np.interp(np.log(f_arr), np.log(freqs), alphas)
    extrapolated = bool(np.any((f_arr < freqs[0]) | (f_arr > freqs[-1])))
    return AlphaLookup(out if out.ndim else float(out), extrapolated)


def refractive_from_permittivity(eps_r: float) -> float:
    """Low-loss refractive index ``sqrt(eps_r)``."""
    if not eps_r >= 1.0:
        raise DomainError(f"relative permittivity {eps_r} < 1")
    return math.sqrt(eps_r)


def absorption_from_loss_tangent(f, eps_r, tan_delta):
    """Power absorption coefficient (1/m) of a low-loss dielectric.

    Uses ``alpha = 2 pi f sqrt(eps_r) tan_delta / c``.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise DomainError("frequency must be positive")
    if not np.all(np.asarray(tan_delta) >= 0):
        raise DomainError("loss tangent must be non-negative")
    n = refractive_from_permittivity(eps_r)
    out = 2.0 * math.pi * f_arr * n * np.asarray(tan_delta, dtype=float) / SPEED_OF_LIGHT
    return out if np.ndim(out) else float(out)


# Standard-atmosphere (1013.25 hPa, 15 C, 7.5 g/m^3 water vapour) gaseous
# attenuation sampled from ITU-R P.676 line-by-line, converted to 1/m.
ATMOSPHERE_TABLE: tuple[tuple[float, float], ...] = (
    (100e9, 1.055e-4),
    (200e9, 6.651e-4),
    (300e9, 1.208e-3),
    (400e9, 4.523e-3),
    (500e9, 1.458e-2),
    (600e9, 3.356e-2),
    (700e9, 1.931e-2),
    (800e9, 2.592e-2),
    (900e9, 2.463e-2),
    (1000e9, 1.602e-1),
)


def atmospheric_alpha(f):
    """Molecular absorption coefficient (1/m) of standard air, 0.1-1 THz."""
    f_arr = np.asarray(f, dtype=float)
    lo, hi = ATMOSPHERE_TABLE[0][0], ATMOSPHERE_TABLE[-1][0]
    if np.any((f_arr < lo) | (f_arr > hi)):
        raise DomainError(f"atmospheric table covers {lo:g}-{hi:g} Hz")
    return AIR.alpha(f_arr)


@dataclass(frozen=True)
class PolymerRow:
    """One row of the polymer substrate table (raw published values)."""

    name: str
    eps_r: float
    tan_delta: tuple[float, float] | None
    alpha_per_cm: float
    refractive_index: float | None
    band_thz: tuple[float, float]
    note: str = ""

    @property
    def band_midpoint_hz(self) -> float:
        return 0.5 * (self.band_thz[0] + self.band_thz[1]) * 1e12

    @property
    def tan_delta_mid(self) -> float | None:
        return None if self.tan_delta is None else 0.5 * (self.tan_delta[0] + self.tan_delta[1])


POLYMER_TABLE: dict[str, PolymerRow] = {
    "PET": PolymerRow("PET", 2.86, (0.053, 0.072), 25.0, None, (0.2, 2.5)),
    "PEN": PolymerRow("PEN", 2.56, (0.003, 0.003), 1.0, None, (0.2, 2.5)),
    "PMMA": PolymerRow("PMMA", 2.22, (0.042, 0.07), 22.0, 1.49, (0.2, 2.5)),
    "polypropylene": PolymerRow("polypropylene", 3.0, (0.12, 0.12), 2.0, None, (0.2, 2.5)),
    "PTFE": PolymerRow(
        "PTFE", 2.39, None, 1.6, 1.42, (1.0, 1.0),
        note="tabulated index 1.42 disagrees with sqrt(2.39)=1.546; tabulated index kept",
    ),
}

# Paint and plaster absorption pinned at 200 GHz by iopsim.calibration and held
# flat; refreshed by `iopsim calibrate`.
PAINT_ALPHA = 321.20141146349795
PLASTER_ALPHA = 212.76514807543245

AIR = MediumSpec("air", 1.0, ATMOSPHERE_TABLE)


def _polymer_medium(row: PolymerRow) -> MediumSpec:
    n = row.refractive_index or refractive_from_permittivity(row.eps_r)
    return MediumSpec(row.name, n, row.alpha_per_cm * 100.0)


def _presets() -> dict[str, MediumSpec]:
    entries = [
        AIR,
        MediumSpec("titanium-white-paint", 2.13, PAINT_ALPHA),
        MediumSpec("plaster", 1.73, PLASTER_ALPHA),
    ]
    entries += [_polymer_medium(row) for row in POLYMER_TABLE.values()]
    return {m.name: m for m in entries}


PRESETS: Mapping[str, MediumSpec] = MappingProxyType(_presets())


@dataclass(frozen=True)
class MaterialDb:
    """Immutable catalog of media with a provenance tag per entry.

    Provenance is one of ``"preset"``, ``"file"`` or ``"calibrated"``.
    Missing names raise :class:`ConfigError`.
    """

    entries: Mapping[str, MediumSpec] = field(default_factory=dict)
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        prov = {name: self.provenance.get(name, "preset") for name in self.entries}
        object.__setattr__(self, "provenance", MappingProxyType(prov))

    @classmethod
    def presets(cls) -> "MaterialDb":
        return cls(PRESETS, {name: "preset" for name in PRESETS})

    def __getitem__(self, name: str) -> MediumSpec:
        try:
            return self.entries[name]
        except KeyError:
            raise ConfigError(f"unknown material {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def with_entries(self, media: Sequence[MediumSpec], provenance: str) -> "MaterialDb":
        """Return a new catalog with ``media`` added or replacing same-named entries."""
        entries = dict(self.entries)
        prov = dict(self.provenance)
        for m in media:
            entries[m.name] = m
            prov[m.name] = provenance
        return MaterialDb(entries, prov)


def medium_to_json(m: MediumSpec) -> dict:
    if m.is_constant:
        absorption = {"constant_per_m": m.absorption}
    else:
        absorption = {"samples": [[f, a] for f, a in m.absorption]}
    return {
        "name": m.name,
        "refractive_index": m.refractive_index,
        "roughness_rms_m": m.roughness_rms,
        "absorption": absorption,
    }


def medium_from_json(obj: dict) -> MediumSpec:
    name = obj.get("name") if isinstance(obj, dict) else None
    if not isinstance(name, str) or not name:
        raise ConfigError(f"material entry without a name: {obj!r}")
    try:
        absorption = obj["absorption"]
        if "constant_per_m" in absorption:
            alpha = absorption["constant_per_m"]
            if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
                raise TypeError("constant_per_m must be a number")
        elif "samples" in absorption:
            alpha = tuple((f, a) for f, a in absorption["samples"])
        else:
            raise KeyError("absorption needs 'constant_per_m' or 'samples'")
        return MediumSpec(
            name=name,
            refractive_index=float(obj["refractive_index"]),
            absorption=alpha,
            roughness_rms=float(obj.get("roughness_rms_m", 0.0)),
        )
    except ConfigError as exc:
        raise ConfigError(f"material {name!r}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"material {name!r}: {exc}") from None


def parse_materials(text: str) -> list[MediumSpec]:
    """Parse a material document; an empty document yields no entries."""
    if not text.strip():
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"material file is not valid JSON: {exc}") from None
    if isinstance(doc, dict):
        version = doc.get("version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ConfigError(f"unsupported material format {version!r}")
        items = doc.get("materials", [])
    else:
        items = doc
    if not isinstance(items, list):
        raise ConfigError("material list must be a JSON array")
    media = [medium_from_json(obj) for obj in items]
    seen = set()
    for m in media:
        if m.name in seen:
            raise ConfigError(f"duplicate material {m.name!r} in file")
        seen.add(m.name)
    return media


def load_materials(path: str | os.PathLike, base: MaterialDb | None = None) -> MaterialDb:
    """Load a material file on top of ``base`` (the presets by default)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read material file {path}: {exc}") from None
    base = MaterialDb.presets() if base is None else base
    return base.with_entries(parse_materials(text), "file")


def dumps_materials(db: MaterialDb, names: Sequence[str] | None = None) -> str:
    names = list(db) if names is None else list(names)
    doc = {"version": FORMAT_VERSION, "materials": [medium_to_json(db[n]) for n in names]}
    return json.dumps(doc, indent=2) + "\n"


def save_materials(db: MaterialDb, path: str | os.PathLike, names: Sequence[str] | None = None) -> None:
    Path(path).write_text(dumps_materials(db, names), encoding="utf-8")
