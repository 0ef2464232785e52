import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treeunion.graph import CoupledGraphSource, Graph, coupled_restrict, make_complete, pair_count
from treeunion.lil import (LilConfig, TrajectoryPoint, edge_zscore, geometric_grid, janson_clt_sample,
                           lil_statistic, lil_supremum_report, mu_n, residual_band, sigma,
                           tracking_correlation, trajectories, trajectory)
from treeunion.tree_count import matrix_tree_log_count


def test_mu_examples():
    assert mu_n(4, 0.5) == pytest.approx(math.log(2))
    assert mu_n(2, 0.3) == pytest.approx(math.log(0.3))
    assert mu_n(100, 0.5) == pytest.approx(-99 * math.log(2) + 98 * math.log(100))
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            mu_n(10, bad)


@given(st.integers(2, 5000), st.floats(0.01, 0.99))
def test_mu_identity(n, p):
    assert mu_n(n, p) == (n - 1) * math.log(p) + (n - 2) * math.log(n)


def test_sigma_examples():
    assert sigma(0.5) == pytest.approx(math.sqrt(2))
    assert sigma(2 / 3) == pytest.approx(1.0)
    ps = np.linspace(0.05, 0.999, 50)
    vals = [sigma(p) for p in ps]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        sigma(1.0)


def test_edge_zscore_examples():
    assert edge_zscore(make_complete(3), 0.5) == pytest.approx(math.sqrt(3))
    empty = Graph.from_edges(10, [])
    assert edge_zscore(empty, 0.4) == pytest.approx(-math.sqrt(45 * 0.4 / 0.6))
    half = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert edge_zscore(half, 0.5) == 0.0


def test_lil_statistic():
    n, p = 64, 0.5
    assert lil_statistic(mu_n(n, p), n, p) == 0.0
    with pytest.raises(ValueError):
        lil_statistic(1.0, 15, p)


def test_geometric_grid():
    assert geometric_grid(2, 16, 1024) == [16, 32, 64, 128, 256, 512, 1024]
    assert geometric_grid(3, 16, 1000) == [27, 81, 243, 729]
    assert geometric_grid(2, 20, 31) == []
    with pytest.raises(ValueError):
        geometric_grid(1, 16, 100)


def test_config_guards():
    assert LilConfig(0.5).grid == [16, 32, 64, 128, 256, 512, 1024]
    for kwargs in ({"p": 1.0}, {"p": 0.0}, {"p": 0.5, "n_min": 8}, {"p": 0.5, "n_min": 64, "n_max": 32},
                   {"p": 0.5, "n_min": 20, "n_max": 30}):
        with pytest.raises(ValueError):
            LilConfig(**kwargs)


def test_trajectory_points_consistent():
    cfg = LilConfig(0.5, n_min=16, n_max=128)
    src = CoupledGraphSource(11, 0.5)
    traj = trajectory(src, cfg)
    assert [pt.n for pt in traj] == cfg.grid
    for pt in traj:
        g = coupled_restrict(src, pt.n)
        assert pt.edge_count == g.m
        assert pt.mu == mu_n(pt.n, 0.5)
        assert pt.log_x == pytest.approx(matrix_tree_log_count(g).log, rel=1e-12)
        assert pt.residual == pytest.approx((pt.log_x - pt.mu) / cfg.sigma - pt.e_star)
        assert math.isfinite(pt.e_star)
    assert trajectory(src, cfg) == traj
    with pytest.raises(ValueError):
        trajectory(CoupledGraphSource(1, 0.3), cfg)


def test_sparse_points_undefined():
    cfg = LilConfig(0.02, n_min=16, n_max=32)
    traj = trajectory(CoupledGraphSource(3, 0.02), cfg)
    assert not any(pt.defined for pt in traj)
    assert all(math.isnan(pt.residual) and math.isnan(pt.lil_stat) for pt in traj)
    assert traj[0].as_row()["log_x"] is None


def test_coupled_edge_counts_monotone():
    cfg = LilConfig(0.5, n_min=16, n_max=256)
    for traj in trajectories(5, 6, cfg):
        counts = [pt.edge_count for pt in traj]
        assert counts == sorted(counts)
        full = coupled_restrict(CoupledGraphSource(traj[0].source_seed, 0.5), 256)
        for pt in traj:
            assert full.induced(pt.n).m == pt.edge_count
    assert trajectories(5, 6, cfg, workers=3) == trajectories(5, 6, cfg)


def _pt(n, lil):
    return TrajectoryPoint(0, n, 0, 0.0, 1.0, 0.0, lil, 0.0)


def test_supremum_report_examples():
    assert lil_supremum_report([[_pt(16, 0.0)]]).maxima == [0.0]
    const = [_pt(n, 0.7) for n in (16, 32, 64)]
    rep = lil_supremum_report([const], n_tail=16)
    assert rep.maxima == [0.7] and rep.quantiles["max"] == 0.7
    rep = lil_supremum_report([[_pt(16, 3.0), _pt(32, 0.2)]], n_tail=32)
    assert rep.maxima == [0.2]
    with pytest.raises(ValueError):
        lil_supremum_report([])


def test_structure_small_run():
    cfg = LilConfig(0.5, n_min=16, n_max=256)
    trajs = trajectories(9, 8, cfg)
    band = residual_band(trajs)
    assert band["max_abs"] <= 5
    assert tracking_correlation(trajs) > 0.95


def test_janson_guards():
    with pytest.raises(ValueError):
        janson_clt_sample(64, 1.0, 10, 0)
    with pytest.raises(ValueError):
        janson_clt_sample(8, 0.5, 10, 0)
    a = janson_clt_sample(32, 0.5, 200, 4)
    b = janson_clt_sample(32, 0.5, 200, 4, shards=8)
    assert np.array_equal(a.values, b.values) and a.dropped == b.dropped


@pytest.mark.slow
def test_janson_variance_n64():
    sample = janson_clt_sample(64, 0.5, 2000, 17)
    vals = sample.values
    var = float(vals.var(ddof=1))
    assert abs(var - 1.0) <= 0.2
    assert abs(vals.mean()) <= 4 * math.sqrt(var / vals.size)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [101, 202, 303])
def test_janson_variance_approaches_limit(seed):
    var = {n: float(janson_clt_sample(n, 0.5, 2000, seed + n).values.var(ddof=1)) for n in (32, 128)}
    assert abs(var[128] - 1.0) < abs(var[32] - 1.0)
