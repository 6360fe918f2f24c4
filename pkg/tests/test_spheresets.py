import math

import numpy as np
import pytest

from champagne.kernels import capacity_phi
from champagne.spheresets import (
    CARDINALITY_BANDS,
    SpherePointSet,
    cardinality_check,
    design_sphere_points,
    radius_from_spacing,
)
from champagne.spheresets import _sphere_samples


def test_circle_large_beta_gives_at_least_three_points():
    ps = design_sphere_points(1.0, 1.57, 2, seed=0)
    assert len(ps) >= 3
    assert ps.covering_radius_measured <= ps.beta
    assert ps.min_pairwise_distance >= 2 * ps.beta / 3


def test_circle_beta_01_matches_expected_count():
    ps = design_sphere_points(1.0, 0.1, 2, seed=1)
    assert len(ps) == 32  # ceil(pi * R / beta)
    # adjacent arc pi*R/M bounds the covering radius
    assert math.pi * 1.0 / len(ps) <= ps.beta + 1e-15
    # numeric verification over a dense circle sample
    samples = _sphere_samples(1.0, 2, seed=99, count=100_000)
    from scipy.spatial import cKDTree

    cov = cKDTree(ps.points).query(samples)[0].max()
    assert cov <= ps.beta
    assert ps.min_pairwise_distance >= 2 * ps.beta / 3


def test_all_points_on_sphere():
    for d, beta in ((2, 0.07), (3, 0.15)):
        ps = design_sphere_points(0.8, beta, d, seed=5)
        norms = np.linalg.norm(ps.points, axis=1)
        assert np.allclose(norms, 0.8, rtol=1e-12, atol=0)


def test_sphere_d3_count_band():
    ps = design_sphere_points(1.0, 0.2, 3, seed=2)
    m = len(ps)
    c = 30.0
    assert m * ps.beta**2 <= c
    assert m * ps.beta**2 >= 1 / c
    assert ps.covering_radius_measured <= ps.beta
    assert ps.min_pairwise_distance >= 2 * ps.beta / 3


def test_rejects_degenerate_beta():
    with pytest.raises(ValueError):
        design_sphere_points(1.0, math.pi / 2, 2, seed=0)
    with pytest.raises(ValueError):
        design_sphere_points(0.5, 0.7, 3, seed=0)
    with pytest.raises(ValueError):
        design_sphere_points(1.0, 0.0, 2, seed=0)


def test_determinism_per_seed():
    a = design_sphere_points(1.0, 0.1, 3, seed=11)
    b = design_sphere_points(1.0, 0.1, 3, seed=11)
    assert np.array_equal(a.points, b.points)
    c = design_sphere_points(1.0, 0.1, 3, seed=12)
    assert not np.array_equal(a.points, c.points)


def test_scaling_equivariance_circle():
    R, beta, seed = 0.5, 0.05, 21
    a = design_sphere_points(R, beta, 2, seed=seed)
    b = design_sphere_points(1.0, beta / R, 2, seed=seed)
    assert len(a) == len(b)
    assert np.allclose(a.points, R * b.points, rtol=1e-12, atol=1e-15)


def test_scaling_equivariance_sphere_measured_radii():
    R, beta, seed = 0.5, 0.1, 4
    a = design_sphere_points(R, beta, 3, seed=seed)
    b = design_sphere_points(1.0, beta / R, 3, seed=seed)
    assert a.covering_radius_measured / R == pytest.approx(
        b.covering_radius_measured, rel=1e-6
    )
    assert a.min_pairwise_distance / R == pytest.approx(
        b.min_pairwise_distance, rel=1e-6
    )


def test_count_ratio_stability_across_beta_sweep():
    for d in (2, 3):
        ratios = []
        for beta in (0.02, 0.05, 0.1, 0.2):
            ps = design_sphere_points(1.0, beta, d, seed=7)
            ratios.append(len(ps) * beta ** (d - 1))
        assert max(ratios) / min(ratios) < 4.0


def test_cardinality_check_routes_agree():
    ps = design_sphere_points(1.0, 0.1, 2, seed=1)
    ratio_area, ratio_cap, ok = cardinality_check(ps, rho=0.1)
    assert ratio_area == pytest.approx(3.2, rel=1e-12)
    # spacing-law route: r = exp(-rho/beta), #X * phi(r) * rho collapses to
    # the same number
    r = radius_from_spacing(0.1, 0.1, 2)
    assert len(ps) * capacity_phi(r, 2) * 0.1 == pytest.approx(ratio_area, rel=1e-9)
    assert ratio_cap == pytest.approx(ratio_area, rel=1e-9)
    assert ok


def test_cardinality_check_flags_degenerate_set():
    lonely = SpherePointSet(
        R=1.0,
        d=2,
        beta=0.1,
        points=np.array([[1.0, 0.0]]),
        covering_radius_measured=2.0,
        min_pairwise_distance=math.inf,
        seed=0,
    )
    ratio_area, _, ok = cardinality_check(lonely, rho=0.1)
    assert ratio_area == pytest.approx(0.1)
    assert not ok
    lo, _ = CARDINALITY_BANDS[2]
    assert ratio_area < lo


def test_radius_from_spacing_inverts_spacing_law():
    for d in (2, 3, 4):
        for rho in (0.05, 0.2):
            for r in (1e-6, 1e-3):
                beta = (capacity_phi(r, d) * rho) ** (1.0 / (d - 1))
                assert radius_from_spacing(beta, rho, d) == pytest.approx(r, rel=1e-9)


def test_best_effort_d4():
    ps = design_sphere_points(1.0, 0.5, 4, seed=3)
    assert ps.covering_radius_measured <= ps.beta
    assert ps.min_pairwise_distance >= 2 * ps.beta / 3
    norms = np.linalg.norm(ps.points, axis=1)
    assert np.allclose(norms, 1.0, rtol=1e-12)
