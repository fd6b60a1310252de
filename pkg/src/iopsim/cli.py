"""Command-line front end.

Every scenario reads one JSON document (``--config``); missing keys fall back
to the defaults below, which reproduce the published figure set-ups. Outputs
are CSV files that start with ``#`` comment lines recording the tool version,
a hash of the effective configuration and the seed.

Exit codes: 0 success, 2 configuration error, 3 model or calibration error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import calibrate
from .capacity import air_capacity, batch_link_capacity
from .errors import ConfigError, DomainError, IoPError, ModelError
from .geometry import PATH_ORDER, LayerStack, Placement
from .materials import MaterialDb, dumps_materials, load_materials
from .netsim import Cone, Isotropic, MinCapacity, NetworkConfig, SnrThreshold, connectivity
from .propagation import DEFAULT_MODEL, PropagationModel, all_path_losses

EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 2, 3

DEFAULTS = {
    "pathloss": {
        "frequency_hz": 200e9,
        "paint_thickness_m": 2e-3,
        "paint": "titanium-white-paint",
        "plaster": "plaster",
        "air": "air",
        "rho_D_m": [0.02, 0.04],
        "depths_m": {"start": 2e-5, "stop": 1.98e-3, "num": 99},
    },
    "capacity": {
        "paint_thickness_m": 2e-3,
        "paint": "titanium-white-paint",
        "plaster": "plaster",
        "air": "air",
        "rho_D_m": {"start": 0.01, "stop": 0.04, "num": 13},
        "depths_m": [5e-5, 1e-4, 1.95e-3],
        "band_hz": [200e9, 300e9],
        "n_subbands": 256,
        "tx_psd_w_per_hz": 1e-14,
        "include_air": True,
    },
    "netsim": {
        "paint_thickness_m": 2e-3,
        "paint": "titanium-white-paint",
        "plaster": "plaster",
        "air": "air",
        "wall_size_m": [0.05, 0.05],
        "density_per_m2": [2e3, 5e3, 1e4, 2e4],
        "orientation": {"model": "isotropic"},
        "link_rule": {"snr_threshold_db": 0.0},
        "trials": 100,
        "seed": 0,
        "max_range_m": 0.1,
        "band_hz": [200e9, 300e9],
        "n_subbands": 32,
        "tx_psd_w_per_hz": 1e-14,
        "workers": 1,
    },
    "calibrate": {},
    "materials": {},
}

PATHLOSS_COLUMNS = (
    "burial_depth_m", "rho_D_m", "f_hz", "path_kind",
    "spreading_db", "absorption_db", "reflection_db", "roughness_db", "total_db",
)
CAPACITY_COLUMNS = ("rho_D_m", "depth_m", "medium", "capacity_bps")
NETSIM_COLUMNS = (
    "density_per_m2", "trial", "n_devices", "n_edges",
    "mean_degree", "largest_component_fraction", "isolated_fraction",
)


# -- configuration ---------------------------------------------------------

def load_config(scenario: str, path: str | None) -> tuple[dict, Path]:
    cfg = copy.deepcopy(DEFAULTS[scenario])
    base = Path.cwd()
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        declared = doc.pop("scenario", scenario)
        if declared != scenario:
            raise ConfigError(f"config is for scenario {declared!r}, not {scenario!r}")
        cfg.update(doc)
        base = Path(path).resolve().parent
    cfg["scenario"] = scenario
    return cfg, base


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def value_list(spec, name: str) -> list[float]:
    """A list of floats, or ``{"start", "stop", "num"}`` for an inclusive linspace."""
    if isinstance(spec, dict):
        try:
            values = [round(v, 15) for v in np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"])).tolist()]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: bad range {spec!r} ({exc})") from None
    elif isinstance(spec, (int, float)) and not isinstance(spec, bool):
        values = [float(spec)]
    elif isinstance(spec, list):
        try:
            values = [float(v) for v in spec]
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: values must be numbers") from None
    else:
        raise ConfigError(f"{name}: expected a number, list or range object")
    if not values:
        raise ConfigError(f"{name}: range is empty")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"{name}: values must be finite")
    return values


def material_db(cfg: dict, base: Path) -> MaterialDb:
    path = cfg.get("materials")
    if path is None:
        return MaterialDb.presets()
    return load_materials(base / path)


def build_model(cfg: dict, base: Path) -> PropagationModel:
    spec = cfg.get("model")
    if spec is None:
        return DEFAULT_MODEL
    if isinstance(spec, str):
        try:
            spec = json.loads((base / spec).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read model file {spec}: {exc}") from None
    try:
        return DEFAULT_MODEL.replace(**spec)
    except TypeError as exc:
        raise ConfigError(f"bad model parameters: {exc}") from None


def build_stack(cfg: dict, db: MaterialDb) -> LayerStack:
    return LayerStack.from_db(db, float(cfg["paint_thickness_m"]), cfg["paint"], cfg["plaster"], cfg["air"])


def check_depths(depths, stack: LayerStack):
    T = stack.paint_thickness
    bad = [d for d in depths if not 0 < d < T]
    if bad:
        raise ConfigError(f"burial depths must lie strictly inside (0, {T:g}) m: {bad}")


# -- output ----------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(columns, rows, cfg: dict, seed) -> str:
    buf = io.StringIO(newline="")
    buf.write(f"# iopsim {__version__}\r\n")
    buf.write(f"# config_sha256 {config_hash(cfg)}\r\n")
    buf.write(f"# seed {'none' if seed is None else seed}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_svg(path: Path, series: dict, xlabel: str, ylabel: str, logy: bool = False) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in series.items():
        ax.plot(x, y, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize="small")
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())


# -- scenarios -------------------------------------------------------------

def run_pathloss(cfg: dict, base: Path, out: Path, svg: bool = False) -> Path:
    db = material_db(cfg, base)
    stack = build_stack(cfg, db)
    model = build_model(cfg, base)
    f = float(cfg["frequency_hz"])
    depths = value_list(cfg["depths_m"], "depths_m")
    rhos = value_list(cfg["rho_D_m"], "rho_D_m")
    check_depths(depths, stack)
    rows = []
    for depth in depths:
        for rho in rhos:
            losses = all_path_losses(Placement(depth, depth, rho), stack, f, model)
            for kind in PATH_ORDER:
                if kind not in losses:
                    continue
                pl = losses[kind]
                rows.append({
                    "burial_depth_m": depth, "rho_D_m": rho, "f_hz": f, "path_kind": kind.value,
                    "spreading_db": pl.spreading_db, "absorption_db": pl.absorption_db,
                    "reflection_db": pl.reflection_db, "roughness_db": pl.roughness_db, "total_db": pl.total_db,
                })
    path = out / "pathloss.csv"
    atomic_write(path, render_csv(PATHLOSS_COLUMNS, rows, cfg, cfg.get("seed")))
    if svg:
        series = {}
        for row in rows:
            x, y = series.setdefault(f"{row['path_kind']} rho={row['rho_D_m'] * 100:g} cm", ([], []))
            x.append(row["burial_depth_m"] * 1e3)
            y.append(row["total_db"])
        write_svg(out / "pathloss.svg", series, "burial depth (mm)", "path loss (dB)")
    return path


def run_capacity(cfg: dict, base: Path, out: Path, svg: bool = False) -> Path:
    db = material_db(cfg, base)
    stack = build_stack(cfg, db)
    model = build_model(cfg, base)
    depths = value_list(cfg["depths_m"], "depths_m")
    rhos = value_list(cfg["rho_D_m"], "rho_D_m")
    if any(r <= 0 for r in rhos):
        raise ConfigError("rho_D_m values must be positive")
    check_depths(depths, stack)
    band = tuple(float(b) for b in cfg["band_hz"])
    n_sub = int(cfg["n_subbands"])
    tx = float(cfg["tx_psd_w_per_hz"])
    rows = []
    for rho in rhos:
        *_, caps = batch_link_capacity(depths, depths, [rho] * len(depths), stack, band, n_sub, tx, model)
        for depth, cap in zip(depths, caps.sum(axis=1)):
            rows.append({"rho_D_m": rho, "depth_m": depth, "medium": "paint-multipath", "capacity_bps": float(cap)})
        if cfg.get("include_air", True):
            cap = air_capacity(rho, band, n_sub, tx, air=stack.air).total_capacity
            rows.append({"rho_D_m": rho, "depth_m": "", "medium": "air", "capacity_bps": cap})
    path = out / "capacity.csv"
    atomic_write(path, render_csv(CAPACITY_COLUMNS, rows, cfg, cfg.get("seed")))
    if svg:
        series = {}
        for row in rows:
            label = "air" if row["medium"] == "air" else f"paint h={row['depth_m'] * 1e3:g} mm"
            x, y = series.setdefault(label, ([], []))
            x.append(row["rho_D_m"] * 100)
            y.append(row["capacity_bps"] / 1e9)
        write_svg(out / "capacity.svg", series, "LoS distance (cm)", "capacity (Gbps)", logy=True)
    return path


def run_calibrate(cfg: dict, base: Path, out: Path, svg: bool = False) -> Path:
    db = material_db(cfg, base)
    result = calibrate(db, build_model(cfg, base))
    fit = result.absorption
    report = {
        "alpha_paint_per_m": fit.alpha_paint,
        "alpha_plaster_per_m": fit.alpha_plaster,
        "residuals_db": {k.value: v for k, v in fit.residuals.items()},
        "lateral_coupling_db": dict(result.model.lateral_coupling_db),
        "predictions": {k: float(v) for k, v in result.predictions.items()},
    }
    atomic_write(out / "materials-calibrated.json", dumps_materials(fit.db, ["titanium-white-paint", "plaster"]))
    atomic_write(out / "model-calibrated.json", json.dumps({"lateral_coupling_db": report["lateral_coupling_db"]}, indent=2) + "\n")
    path = out / "calibration.json"
    atomic_write(path, json.dumps(report, indent=2) + "\n")
    print(f"alpha_paint   {fit.alpha_paint:.4f} 1/m")
    print(f"alpha_plaster {fit.alpha_plaster:.4f} 1/m")
    for kind in ("RW-A", "RW-P", "LW-A"):
        print(f"residual {kind:5s} {report['residuals_db'][kind]:+.3f} dB")
    for iface, value in report["lateral_coupling_db"].items():
        print(f"coupling {iface}  {value:.4f} dB")
    return path


def parse_orientation(spec: dict):
    kind = spec.get("model", "isotropic")
    if kind == "isotropic":
        return Isotropic()
    if kind == "cone":
        try:
            return Cone(float(spec["beamwidth_rad"]), float(spec.get("boresight_gain_dbi", 10.0)))
        except KeyError:
            raise ConfigError("cone orientation needs beamwidth_rad") from None
    raise ConfigError(f"unknown orientation model {kind!r}")


def parse_link_rule(spec: dict):
    if "snr_threshold_db" in spec:
        return SnrThreshold(float(spec["snr_threshold_db"]))
    if "min_capacity_bps" in spec:
        return MinCapacity(float(spec["min_capacity_bps"]))
    raise ConfigError("link_rule needs snr_threshold_db or min_capacity_bps")


def run_netsim(cfg: dict, base: Path, out: Path, svg: bool = False) -> Path:
    db = material_db(cfg, base)
    stack = build_stack(cfg, db)
    model = build_model(cfg, base)
    densities = value_list(cfg["density_per_m2"], "density_per_m2")
    seed = int(cfg["seed"])
    rows = []
    for density in densities:
        net = NetworkConfig(
            wall_size=tuple(float(v) for v in cfg["wall_size_m"]),
            density=density,
            stack=stack,
            orientation=parse_orientation(cfg["orientation"]),
            link_rule=parse_link_rule(cfg["link_rule"]),
            trials=int(cfg["trials"]),
            seed=seed,
            max_range=float(cfg["max_range_m"]),
            band=tuple(float(b) for b in cfg["band_hz"]),
            n_subbands=int(cfg["n_subbands"]),
            tx_psd=float(cfg["tx_psd_w_per_hz"]),
            model=model,
        )
        report = connectivity(net, workers=int(cfg.get("workers", 1)))
        for i, t in enumerate(report.trials):
            rows.append({
                "density_per_m2": density, "trial": i, "n_devices": t.n_devices, "n_edges": t.n_edges,
                "mean_degree": t.mean_degree, "largest_component_fraction": t.largest_component_fraction,
                "isolated_fraction": t.isolated_fraction,
            })
        print(f"density {density:g}/m^2: mean degree {report.mean_degree:.3f}, "
              f"largest component {report.largest_component_fraction:.3f}, "
              f"isolated {report.isolated_fraction:.3f}")
    hashed = {k: v for k, v in cfg.items() if k != "workers"}
    path = out / "netsim.csv"
    atomic_write(path, render_csv(NETSIM_COLUMNS, rows, hashed, seed))
    if svg:
        means = [np.mean([r["largest_component_fraction"] for r in rows if r["density_per_m2"] == d]) for d in densities]
        write_svg(out / "netsim.svg", {"largest component": (densities, means)}, "density (1/m^2)", "fraction")
    return path


def run_materials(action: str, cfg: dict, config_path: str | None) -> None:
    if action == "validate":
        if config_path is None:
            raise ConfigError("materials validate needs --config <material file>")
        db = load_materials(config_path)
        n_file = sum(1 for p in db.provenance.values() if p == "file")
        print(f"{config_path}: {n_file} valid material(s)")
        return
    db = MaterialDb.presets() if config_path is None else load_materials(config_path)
    print(f"{'name':24s} {'n':>6s} {'alpha(250 GHz) 1/m':>20s} {'roughness m':>12s}  provenance")
    for name in db:
        m = db[name]
        print(f"{name:24s} {m.refractive_index:6.3f} {m.alpha(250e9):20.6g} {m.roughness_rms:12.3g}  {db.provenance[name]}")


SCENARIOS = {"pathloss": run_pathloss, "capacity": run_capacity, "calibrate": run_calibrate, "netsim": run_netsim}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--svg", action="store_true", help="also write an SVG plot")

    parser = argparse.ArgumentParser(prog="iopsim", description="THz paint-layer channel simulator")
    parser.add_argument("--version", action="version", version=f"iopsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    mat = sub.add_parser("materials", parents=[common], help="list or validate materials")
    mat.add_argument("action", choices=("list", "validate"))
    for name in SCENARIOS:
        sub.add_parser(name, parents=[common], help=f"run the {name} scenario")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "materials":
            run_materials(args.action, {}, args.config)
            return EXIT_OK
        cfg, base = load_config(args.command, args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
        path = SCENARIOS[args.command](cfg, base, Path(args.out), args.svg)
        print(f"wrote {path}")
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except IoPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
