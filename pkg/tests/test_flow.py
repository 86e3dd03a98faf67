import csv
import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from hadflow import catalog
from hadflow.exact import to_phase_vector
from hadflow.flow import (SimConfig, StepFloorWarning, advance, distance_to_lines, integrate, pca_project,
                          sample_neighborhood, wrap, write_snapshots)
from hadflow.phase_core import PhaseVector, core_permutation, gradient, potential_batch


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(times=(5, 5))
    with pytest.raises(ValueError):
        SimConfig(radius=-1)
    with pytest.raises(ValueError):
        SimConfig(n_points=0)


def test_sampling_box_and_determinism(f4_point):
    cfg = SimConfig(n_points=500, radius=0.3, seed=9)
    a = sample_neighborhood(f4_point, cfg)
    b = sample_neighborhood(f4_point, cfg)
    assert a.shape == (500, 9)
    assert np.array_equal(a, b)
    assert np.max(np.abs(a - f4_point.theta)) <= 0.3


def test_zero_radius_returns_center(f4_point):
    pts = sample_neighborhood(f4_point, SimConfig(n_points=1, radius=0.0))
    assert np.array_equal(pts[0], f4_point.theta)


def test_fixed_point_is_stationary(f4_point):
    cfg = SimConfig(n_points=1)
    snaps = integrate(f4_point.theta[None, :], [1.0, 10.0], cfg, with_pca=False)
    for s in snaps:
        # motion stays within the absolute integration tolerance
        assert np.max(np.abs(s.thetas[0] - f4_point.theta)) < 10 * cfg.atol


def test_matches_reference_integrator(f4_point):
    rng = np.random.default_rng(2)
    pts = f4_point.theta + rng.uniform(-0.3, 0.3, (4, 9))
    cfg = SimConfig(rtol=1e-10, atol=1e-12)
    y, _, _ = advance(pts, 0.0, 30.0, cfg)
    for x0, x1 in zip(pts, y):
        ref = solve_ivp(lambda t, x: gradient(PhaseVector(4, x)), (0, 30), x0, method="DOP853",
                        rtol=1e-11, atol=1e-13)
        assert np.max(np.abs(ref.y[:, -1] - x1)) < 1e-7


def test_potential_decreases_pointwise(rng):
    d = 5
    pts = rng.uniform(0, 2 * math.pi, (20, 16))
    snaps = integrate(pts, [0.5, 2.0, 8.0], with_pca=False)
    v = [potential_batch(pts, d)] + [s.potential for s in snaps]
    for before, after in zip(v, v[1:]):
        assert np.all(after <= before * (1 + 1e-9) + 1e-12)
        assert np.all((after < before) | (before < 1e-12))


def test_permutation_equivariance(rng):
    d = 4
    pts = rng.uniform(0, 2 * math.pi, (10, 9))
    a = integrate(pts, [3.0], with_pca=False)[0].thetas
    for _ in range(3):
        rp = [0, *(rng.permutation(3) + 1)]
        cp = [0, *(rng.permutation(3) + 1)]
        idx = core_permutation(d, rp, cp)
        b = integrate(pts[:, idx], [3.0], with_pca=False)[0].thetas
        assert np.max(np.abs(a[:, idx] - b)) < 1e-6


def test_batch_independence(rng):
    pts = rng.uniform(0, 2 * math.pi, (6, 9))
    together = integrate(pts, [4.0], with_pca=False)[0].thetas
    alone = integrate(pts[2:3], [4.0], with_pca=False)[0].thetas
    assert np.array_equal(together[2], alone[0])


def test_step_floor_reported_per_point(f4_point):
    cfg = SimConfig(rtol=1e-14, atol=1e-16, min_step=0.05)
    pts = f4_point.theta + np.array([[0.3] * 9, [0.0] * 9])
    with pytest.warns(StepFloorWarning):
        snaps = integrate(pts, [1.0], cfg, with_pca=False)
    assert snaps[0].underflow[0]
    assert not snaps[0].underflow[1]


def test_pca_rank_one_cloud(rng):
    direction = rng.normal(size=9)
    pts = np.outer(rng.normal(size=200), direction) + 1.0
    res = pca_project(pts)
    assert res.explained_ratio[0] > 0.999
    assert res.degenerate
    assert res.basis.shape[0] == 1


def test_pca_isotropic_cloud():
    pts = np.random.default_rng(0).normal(size=(10_000, 9))
    res = pca_project(pts)
    assert not res.degenerate
    assert res.explained_variance[0] / res.explained_variance[2] < 2
    assert np.all(np.diff(res.explained_variance) <= 0)
    assert np.allclose(res.basis @ res.basis.T, np.eye(3), atol=1e-12)


def test_pca_needs_four_points():
    with pytest.raises(ValueError):
        pca_project(np.zeros((3, 4)))


def test_distance_to_lines_wraps(f4_point):
    V = catalog.vectors("F4_1_center")
    on_line = f4_point.theta + 0.2 * V[1] + 2 * np.pi
    assert distance_to_lines(on_line[None, :], f4_point, V)[0] < 1e-12
    assert np.allclose(wrap([np.pi, -np.pi, 3 * np.pi]), np.pi)


def test_export_is_deterministic(tmp_path, f4_point):
    cfg = SimConfig(n_points=8, seed=4, times=(1.0, 2.0))
    outputs = []
    for sub in ("a", "b"):
        snaps = integrate(sample_neighborhood(f4_point, cfg), cfg.times, cfg)
        paths = write_snapshots(snaps, tmp_path / sub, {"config": cfg})
        outputs.append([p.read_bytes() for p in paths])
    assert outputs[0] == outputs[1]
    rows = list(csv.DictReader((tmp_path / "a" / "snapshot_000.csv").open()))
    assert list(rows[0]) == ["t", "point_id", *[f"theta_{i}" for i in range(1, 10)], "log10_mag",
                             "pc1", "pc2", "pc3"]
    assert len(rows) == 8
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert len(manifest["snapshots"]) == 2
    assert len(manifest["snapshots"][0]["pca_basis"]) == 3
    assert manifest["config"]["seed"] == 4
