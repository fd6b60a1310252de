"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line (measured value, pinned tolerance and
runtime against its budget) that is printed in the pytest terminal summary.
Run ``python tests/test_acceptance.py`` to print the lines directly.
"""

import math
import time

import numpy as np
import pytest
from netsim_oracle import brute_force_edges, graph_stats

from iopsim.calibration import calibrate, loss_deltas, reference_stack
from iopsim.capacity import air_capacity, batch_link_capacity, link_capacity
from iopsim.geometry import PATH_ORDER, LayerStack, PathKind, Placement, path_geometry
from iopsim.materials import POLYMER_TABLE, MediumSpec, absorption_from_loss_tangent
from iopsim.netsim import NetworkConfig, connectivity, network_edges, sample_network, trial_stats
from iopsim.noise import total_noise_psd
from iopsim.propagation import batch_path_losses, fresnel_magnitude, path_loss, roughness_factor

RESULTS: list[str] = []

KB = 1.380649e-23
C = 299792458.0
F_REF = 200e9


def report(number, title, ok, detail, elapsed, budget):
    timing = f"{elapsed:.2f}s" + (f" < {budget:g}s" if budget else "")
    in_time = budget is None or elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] criterion {number}: {title}: {detail} ({timing})"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, line


@pytest.fixture(scope="module")
def fitted():
    return calibrate()


@pytest.fixture(scope="module")
def stack(fitted):
    return reference_stack(fitted.db)


def test_criterion_1_calibration_identities():
    t0 = time.perf_counter()
    cal = calibrate()
    deltas = loss_deltas(reference_stack(cal.db), cal.model)
    dw, lwp = deltas[PathKind.DW], deltas[PathKind.LW_P]
    elapsed = time.perf_counter() - t0
    ok = abs(dw - 53.89) <= 0.05 and abs(lwp - 41.97) <= 0.05
    report(1, "calibration identities", ok,
           f"DW {dw:.3f} dB (53.89 +/- 0.05), LW-P {lwp:.3f} dB (41.97 +/- 0.05)", elapsed, 1.0)


def test_criterion_2_genuine_predictions(fitted, stack):
    t0 = time.perf_counter()
    deltas = loss_deltas(stack, fitted.model)
    elapsed = time.perf_counter() - t0
    targets = {PathKind.RW_A: 52.82, PathKind.RW_P: 52.39, PathKind.LW_A: 12.79}
    ok = all(abs(deltas[k] - v) <= 1.5 for k, v in targets.items())
    detail = ", ".join(f"{k} {deltas[k]:.2f} dB ({v} +/- 1.5)" for k, v in targets.items())
    report(2, "uncalibrated loss growth", ok, detail, elapsed, 1.0)


def test_criterion_3_dominance_crossover(fitted, stack):
    t0 = time.perf_counter()
    T = stack.paint_thickness
    distance = np.arange(0.5e-3, 0.0, -1e-6)  # distance to the plaster, far to near, 1 um steps
    depth = T - distance
    losses = batch_path_losses(depth, depth, np.full_like(depth, 0.02), [F_REF], stack, fitted.model)
    totals = np.stack([losses[k].total_db[:, 0] for k in PATH_ORDER])
    winner = [PATH_ORDER[i] for i in np.argmin(totals, axis=0)]
    switches = [i for i in range(1, len(winner)) if winner[i] != winner[i - 1]]
    elapsed = time.perf_counter() - t0
    ok = (
        len(switches) == 1
        and winner[switches[0] - 1] is PathKind.LW_A
        and winner[switches[0]] is PathKind.LW_P
    )
    crossover = distance[switches[0]] if switches else float("nan")
    ok = ok and 0.03e-3 <= crossover <= 0.15e-3
    sequence = " -> ".join(str(winner[s]) for s in [0, *switches])
    report(3, "LW-A to LW-P crossover at rho_D 2 cm", ok,
           f"{sequence} at {crossover * 1e3:.3f} mm from plaster, window [0.03, 0.15] mm"
           f" (fitted, not a prediction)", elapsed, 5.0)


def test_criterion_4_lateral_air_slowest_growth(fitted, stack):
    t0 = time.perf_counter()
    depths = np.linspace(0.02e-3, 1.98e-3, 99)
    n = len(depths)
    near = batch_path_losses(depths, depths, np.full(n, 0.01), [F_REF], stack, fitted.model)
    far = batch_path_losses(depths, depths, np.full(n, 0.04), [F_REF], stack, fitted.model)
    growth = np.stack([far[k].total_db[:, 0] - near[k].total_db[:, 0] for k in PATH_ORDER])
    slowest = np.argmin(growth, axis=0)
    elapsed = time.perf_counter() - t0
    lwa = PATH_ORDER.index(PathKind.LW_A)
    ok = bool(np.all(np.isfinite(growth)) and np.all(slowest == lwa))
    others = np.delete(growth, lwa, axis=0).min(axis=0) - growth[lwa]
    report(4, "LW-A slowest growth 1->4 cm", ok,
           f"{np.count_nonzero(slowest == lwa)}/{n} depths, min lead {others.min():.2f} dB", elapsed, 5.0)


def test_criterion_5_capacity_ordering(fitted, stack):
    t0 = time.perf_counter()
    rhos = np.linspace(0.01, 0.04, 31)
    depths = [0.05e-3, 0.1e-3, 1.95e-3]
    caps = np.empty((len(rhos), 3))
    for i, rho in enumerate(rhos):
        caps[i] = batch_link_capacity(depths, depths, [rho] * 3, stack, model=fitted.model)[-1].sum(axis=1)
    ordered = bool(np.all((caps[:, 0] > caps[:, 1]) & (caps[:, 1] > caps[:, 2])))
    gap = caps[:, 0] - caps[:, 2]
    gap_ok = bool(np.all((gap >= 0.5e9) & (gap <= 50e9)))
    i2 = int(np.argmin(abs(rhos - 0.02)))
    ratio = air_capacity(0.02).total_capacity / caps[i2].max()
    elapsed = time.perf_counter() - t0
    ok = ordered and gap_ok and ratio >= 20
    report(5, "capacity ordering", ok,
           f"(a) ordered at {len(rhos)} rho_D: {ordered}; (b) gap {gap.min() / 1e9:.2f}-{gap.max() / 1e9:.2f} Gbps"
           f" in [0.5, 50]; (c) air/paint {ratio:.1f} >= 20", elapsed, 30.0)


def test_criterion_6_loss_tangent_cross_check():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("PET", "PEN", "PMMA"):
        row = POLYMER_TABLE[name]
        converted = absorption_from_loss_tangent(row.band_midpoint_hz, row.eps_r, row.tan_delta_mid)
        ratio = converted / (row.alpha_per_cm * 100)
        ok = ok and 0.5 <= ratio <= 2.0
        parts.append(f"{name} x{ratio:.2f}")
    elapsed = time.perf_counter() - t0
    report(6, "loss tangent vs tabulated alpha at 1.35 THz", ok, ", ".join(parts) + " (within x2)", elapsed, 1.0)


def test_criterion_7_property_suites(fitted, stack):
    t0 = time.perf_counter()
    checks = {}
    # Friis reduction: index 1 (paint kept denser by 1e-12), no absorption
    vac = MediumSpec("vac", 1.0)
    free = LayerStack(2e-3, vac, MediumSpec("near-vacuum", 1.0 + 1e-12), vac)
    worst = 0.0
    for rho in (0.005, 0.02, 0.07):
        for f in (1e11, 3e11, 1e12):
            pl = path_loss(path_geometry(PathKind.DW, Placement(1e-3, 1e-3, rho), free), free, f)
            worst = max(worst, abs(pl.total_db - 20 * math.log10(4 * math.pi * rho * f / C)))
    checks["Friis"] = worst < 1e-9

    rng = np.random.default_rng(12345)
    h_t, h_r = rng.uniform(1e-5, 1.99e-3, (2, 400))
    rho = rng.uniform(1e-3, 0.1, 400)
    grid = [1e11, 2.5e11, 1e12]
    a = batch_path_losses(h_t, h_r, rho, grid, stack, fitted.model)
    b = batch_path_losses(h_r, h_t, rho, grid, stack, fitted.model)
    checks["reciprocity"] = all(
        np.array_equal(np.isinf(a[k].total_db), np.isinf(b[k].total_db))
        and np.allclose(np.nan_to_num(a[k].total_db, posinf=0), np.nan_to_num(b[k].total_db, posinf=0),
                        rtol=1e-12, atol=1e-9)
        for k in PATH_ORDER
    )

    theta = np.linspace(0, math.pi / 2 - 1e-9, 2001)
    mags = [fresnel_magnitude(n1, n2, theta, pol) for n1, n2 in ((2.13, 1.0), (2.13, 1.73), (1.0, 2.13))
            for pol in ("TE", "TM", "average")]
    checks["|Gamma|<=1"] = all(np.all((m >= 0) & (m <= 1)) for m in mags)
    tir = theta > math.asin(1 / 2.13)
    checks["TIR |Gamma|=1"] = bool(np.all(fresnel_magnitude(2.13, 1.0, theta[tir]) == 1.0)
                                   and np.all(fresnel_magnitude(2.13, 1.73, theta[theta > math.asin(1.73 / 2.13)]) == 1.0))
    checks["roughness(0)=0"] = bool(np.all(roughness_factor(0.0, 1e-3, theta) == 0.0))

    change = 0.0
    for h, r in ((0.05e-3, 0.01), (1e-3, 0.02), (1.95e-3, 0.04), (0.3e-3, 0.03)):
        p = Placement(h, h, r)
        c256 = link_capacity(p, stack, n_subbands=256, model=fitted.model).total_capacity
        c512 = link_capacity(p, stack, n_subbands=512, model=fitted.model).total_capacity
        change = max(change, abs(c512 - c256) / c256)
    checks["256->512 sub-bands"] = change < 1e-3

    lo = hi = True
    for h1, h2, r in zip(h_t[:40], h_r[:40], rho[:40]):
        psd = total_noise_psd(np.linspace(1e11, 1e12, 16), Placement(h1, h2, r), stack, model=fitted.model).psd
        lo = lo and bool(np.all(psd >= KB * 290 * (1 - 1e-12)))
        hi = hi and bool(np.all(psd <= 2 * KB * 290 * (1 + 1e-12)))
    checks["noise in [kT, 2kT]"] = lo and hi
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items()) + f" (max sub-band change {change:.1e})"
    report(7, "property suites", all(checks.values()), detail, elapsed, None)


LADDER = (4e3, 6e3, 8e3, 1e4, 1.2e4)
Z_ONE_SIDED = 2.326  # 1% one-sided


def test_criterion_8_netsim_oracles(stack, fitted):
    t0 = time.perf_counter()
    cfg = NetworkConfig((0.08, 0.08), 4e3, stack, trials=100, seed=2024, max_range=0.05, model=fitted.model)
    mismatches = checked = 0
    for i in range(cfg.trials):
        real = sample_network(cfg, i)
        if len(real) > 50:
            continue
        checked += 1
        edges = {tuple(e) for e in network_edges(real, cfg)}
        ours = trial_stats(len(real), sorted(edges))
        ref_edges = brute_force_edges(real, cfg)
        ref = graph_stats(len(real), ref_edges)
        same = edges == ref_edges and np.allclose(
            [ours.mean_degree, ours.largest_component_fraction, ours.isolated_fraction], ref)
        mismatches += not same
    brute_ok = mismatches == 0 and checked >= 95

    small = NetworkConfig((0.08, 0.08), 8e3, stack, trials=24, seed=99, max_range=0.05, model=fitted.model)
    bitwise = repr(connectivity(small, workers=1)) == repr(connectivity(small, workers=3))

    means, ses = [], []
    for density in LADDER:
        ladder_cfg = NetworkConfig((0.08, 0.08), density, stack, trials=200, seed=7, max_range=0.05,
                                   model=fitted.model)
        rep = connectivity(ladder_cfg)
        means.append(rep.largest_component_fraction)
        ses.append(rep.std("largest_component_fraction") / math.sqrt(200))
    steps = [
        (means[k + 1] - means[k]) / math.hypot(ses[k], ses[k + 1]) for k in range(len(LADDER) - 1)
    ]
    monotone = all(z > -Z_ONE_SIDED for z in steps)
    elapsed = time.perf_counter() - t0
    report(8, "netsim oracles", brute_ok and bitwise and monotone,
           f"brute force {checked - mismatches}/{checked} trials with N<=50 match; serial==parallel {bitwise}; "
           f"largest component {' '.join(f'{m:.3f}' for m in means)} (min step z {min(steps):+.1f} > -{Z_ONE_SIDED})",
           elapsed, 60.0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
