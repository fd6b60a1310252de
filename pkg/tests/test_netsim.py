import math

import numpy as np
import pytest
from netsim_oracle import brute_force_edges, graph_stats

from iopsim.calibration import reference_stack
from iopsim.errors import ConfigError, DegeneratePairError
from iopsim.netsim import (
    Cone,
    Isotropic,
    MinCapacity,
    NetworkConfig,
    SnrThreshold,
    UnionFind,
    candidate_pairs,
    check_cutoff,
    connectivity,
    network_edges,
    pair_link,
    run_trial,
    sample_network,
    trial_stats,
)


@pytest.fixture(scope="module")
def ref_stack():
    return reference_stack()


def make(stack, **kw):
    base = dict(wall_size=(0.08, 0.08), density=4e3, stack=stack, trials=10, seed=7, max_range=0.05)
    base.update(kw)
    return NetworkConfig(**base)


def test_sampling_is_seeded(ref_stack):
    cfg = make(ref_stack)
    a, b = sample_network(cfg, 3), sample_network(cfg, 3)
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.depths, b.depths)
    c = sample_network(cfg, 4)
    assert len(c) != len(a) or not np.array_equal(a.positions, c.positions)
    assert np.all((a.depths > 0) & (a.depths < ref_stack.paint_thickness))
    assert np.allclose(np.linalg.norm(a.orientations, axis=1), 1.0)
    assert np.all((a.positions >= 0) & (a.positions <= 0.08))


def test_device_count_is_poisson(ref_stack):
    cfg = make(ref_stack, trials=300)
    counts = np.array([len(sample_network(cfg, i)) for i in range(300)])
    lam = cfg.density * cfg.area
    assert abs(counts.mean() - lam) < 4 * math.sqrt(lam / 300)
    assert counts.var(ddof=1) == pytest.approx(lam, rel=0.3)


def test_candidate_pairs_match_all_pairs(ref_stack):
    real = sample_network(make(ref_stack, density=8e3), 0)
    got = {tuple(p) for p in candidate_pairs(real, 0.03)}
    n = len(real)
    want = {(a, b) for a in range(n) for b in range(a + 1, n)
            if np.hypot(*(real.positions[a] - real.positions[b])) <= 0.03}
    assert got == want


@pytest.mark.parametrize("orientation,rule", [
    (Isotropic(), SnrThreshold(0.0)),
    (Cone(math.radians(120), 8.0), SnrThreshold(3.0)),
    (Isotropic(), MinCapacity(5e9)),
])
def test_edges_match_brute_force(ref_stack, orientation, rule):
    cfg = make(ref_stack, orientation=orientation, link_rule=rule)
    for i in range(10):
        real = sample_network(cfg, i)
        edges = {tuple(e) for e in network_edges(real, cfg)}
        assert edges == brute_force_edges(real, cfg)
        stats = trial_stats(len(real), sorted(edges))
        mean_degree, largest, isolated = graph_stats(len(real), edges)
        assert stats.mean_degree == pytest.approx(mean_degree)
        assert stats.largest_component_fraction == pytest.approx(largest)
        assert stats.isolated_fraction == pytest.approx(isolated)


def test_pair_link_symmetric_for_isotropic(ref_stack):
    cfg = make(ref_stack)
    real = sample_network(cfg, 1)
    ab, ba = pair_link(real, 0, 1, cfg), pair_link(real, 1, 0, cfg)
    assert ab.snr_db == pytest.approx(ba.snr_db, rel=1e-12)
    with pytest.raises(DegeneratePairError):
        pair_link(real, 0, 0, cfg)


def test_union_find():
    uf = UnionFind(6)
    for a, b in [(0, 1), (1, 2), (4, 5)]:
        uf.union(a, b)
    assert sorted(uf.component_sizes()) == [1, 2, 3]
    assert uf.find(2) == uf.find(0) != uf.find(4)


def test_trial_stats_edge_cases():
    assert trial_stats(0, []).largest_component_fraction == 0.0
    s = trial_stats(3, [])
    assert s.isolated_fraction == 1.0 and s.largest_component_fraction == pytest.approx(1 / 3)


def test_empty_wall(ref_stack):
    cfg = make(ref_stack, density=0.0)
    assert run_trial(cfg, 0).n_devices == 0


def test_serial_equals_parallel(ref_stack):
    cfg = make(ref_stack, trials=6)
    assert repr(connectivity(cfg, workers=1)) == repr(connectivity(cfg, workers=2))


def test_short_cutoff_rejected(ref_stack):
    with pytest.raises(ConfigError):
        check_cutoff(make(ref_stack, max_range=0.005))
    check_cutoff(make(ref_stack))


def test_config_validation(ref_stack):
    with pytest.raises(ConfigError):
        make(ref_stack, wall_size=(0.0, 0.1))
    with pytest.raises(ConfigError):
        make(ref_stack, density=-1)
    with pytest.raises(ConfigError):
        make(ref_stack, trials=0)
    with pytest.raises(ConfigError):
        Cone(0.0)


def test_cone_gain_profile():
    cone = Cone(math.radians(60), 10.0)
    b = np.array([1.0, 0.0, 0.0])
    assert cone.gain_db(b, np.array([2.0, 0.0, 0.0])) == pytest.approx(10.0)
    off = np.array([math.cos(math.radians(30)), math.sin(math.radians(30)), 0.0])
    assert cone.gain_db(b, off) == pytest.approx(-10.0)


def test_report_summary(ref_stack):
    report = connectivity(make(ref_stack, trials=5))
    s = report.summary()
    assert s["trials"] == 5
    assert 0 <= s["largest_component_fraction_mean"] <= 1
