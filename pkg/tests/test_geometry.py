import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from champagne.geometry import (
    Ball,
    Box,
    BubbleSet,
    Union,
    distance_to_boundary,
    domain_from_dict,
    inward_offset,
    lshape,
    make_exhaustion,
    nearest_bubble_distance,
    sample_boundary,
)
from champagne.rand import substream


def test_ball_signed_distance():
    b = Ball(center=(0.0, 0.0), radius=1.0)
    assert distance_to_boundary(b, (0.0, 0.0)) == -1.0
    assert distance_to_boundary(b, (2.0, 0.0)) == 1.0
    assert distance_to_boundary(b, (1.0, 0.0)) == 0.0


def test_box_signed_distance():
    box = Box(lo=(0.0, 0.0), hi=(2.0, 1.0))
    assert distance_to_boundary(box, (1.0, 0.5)) == pytest.approx(-0.5)
    assert distance_to_boundary(box, (3.0, 0.5)) == pytest.approx(1.0)
    # exterior corner distance is the Euclidean distance to the corner
    assert distance_to_boundary(box, (3.0, 2.0)) == pytest.approx(math.sqrt(2.0))


def test_union_matches_componentwise_min():
    dom = lshape(arm=2.0, thickness=1.0)
    b1, b2 = dom.parts
    rng = substream(3, 1)
    pts = rng.uniform(-0.5, 2.5, size=(500, 2))
    sd = dom.signed_distance(pts)
    oracle = np.minimum(b1.signed_distance(pts), b2.signed_distance(pts))
    assert np.array_equal(sd, oracle)


@settings(max_examples=100)
@given(
    x1=st.floats(-2, 3), y1=st.floats(-2, 3), x2=st.floats(-2, 3), y2=st.floats(-2, 3)
)
def test_signed_distance_is_one_lipschitz(x1, y1, x2, y2):
    doms = [
        Ball(center=(0.3, -0.2), radius=0.8),
        Box(lo=(0.0, 0.0), hi=(2.0, 1.0)),
        lshape(),
    ]
    p, q = np.array([x1, y1]), np.array([x2, y2])
    for dom in doms:
        dp, dq = dom.sdf(p), dom.sdf(q)
        assert abs(dp - dq) <= np.linalg.norm(p - q) + 1e-12


def test_domain_roundtrip():
    for dom in (Ball(center=(0.0, 1.0), radius=0.5), Box(lo=(0, 0), hi=(1, 2)), lshape()):
        again = domain_from_dict(dom.to_dict())
        pts = substream(1, 9).uniform(-1, 2, size=(64, 2))
        assert np.array_equal(dom.signed_distance(pts), again.signed_distance(pts))


def _random_bubbleset(rng, n, d=2, layers=4):
    centers = rng.uniform(-1.0, 1.0, size=(n, d))
    layer_ids = rng.integers(0, layers, size=n)
    layer_r = rng.uniform(0.001, 0.02, size=layers)
    radii = layer_r[layer_ids]
    return BubbleSet(centers, radii, layer_ids)


def test_nearest_single_bubble():
    bs = BubbleSet(np.array([[0.0, 0.0]]), np.array([0.1]), np.array([0]))
    dist, i = nearest_bubble_distance(bs, (0.5, 0.0))
    assert dist == pytest.approx(0.4)
    assert i == 0


def test_nearest_tie_reports_unique_distance():
    bs = BubbleSet(
        np.array([[-1.0, 0.0], [1.0, 0.0]]), np.array([0.1, 0.1]), np.array([0, 1])
    )
    dist, i = nearest_bubble_distance(bs, (0.0, 0.0))
    assert dist == pytest.approx(0.9)
    assert i in (0, 1)


def test_nearest_inside_reports_containing_bubble():
    bs = BubbleSet(
        np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.2, 0.2]), np.array([0, 1])
    )
    dist, i = nearest_bubble_distance(bs, (0.05, 0.0))
    assert dist <= 0
    assert i == 0


def test_nearest_grid_tree_brute_agree():
    rng = substream(17, 2)
    bs = _random_bubbleset(rng, 10_000)
    probes = rng.uniform(-1.2, 1.2, size=(1000, 2))
    batch_d, batch_i = bs.nearest_batch(probes)
    for k in range(len(probes)):
        gd, gi = bs.nearest(probes[k])
        bd, bi = bs.nearest_bruteforce(probes[k])
        assert gd == pytest.approx(bd, abs=1e-12)
        assert batch_d[k] == pytest.approx(bd, abs=1e-12)
        # the minimizing bubble agrees unless the distance ties
        if gi != bi:
            assert bs.radii[gi] + np.linalg.norm(
                probes[k] - bs.centers[gi]
            ) == pytest.approx(bs.radii[bi] + np.linalg.norm(probes[k] - bs.centers[bi]), abs=1e-12)


def test_empty_bubbleset():
    bs = BubbleSet.empty(2)
    dist, i = bs.nearest((0.0, 0.0))
    assert math.isinf(dist) and i == -1
    d, ids = bs.nearest_batch(np.zeros((3, 2)))
    assert np.all(np.isinf(d)) and np.all(ids == -1)


def test_overlap_detection_agrees_with_bruteforce():
    rng = substream(23, 5)
    centers = rng.uniform(0, 1, size=(300, 2))
    radii = np.full(300, 0.03)
    layer_ids = np.repeat(np.arange(3), 100)
    bs = BubbleSet(centers, radii, layer_ids)
    assert bs.overlapping_pairs() == bs.overlapping_pairs_bruteforce()


def test_nonuniform_layer_radii_rejected():
    with pytest.raises(ValueError):
        BubbleSet(np.zeros((2, 2)), np.array([0.1, 0.2]), np.array([0, 0]))


def test_sample_boundary_ball():
    dom = Ball(center=(0.5, 0.5), radius=0.7)
    pts = sample_boundary(dom, 500, seed=4)
    norms = np.linalg.norm(pts - np.array([0.5, 0.5]), axis=1)
    assert np.max(np.abs(norms - 0.7)) < 1e-8


def test_sample_boundary_box_points_on_faces():
    dom = Box(lo=(0.0, 0.0), hi=(2.0, 1.0))
    pts = sample_boundary(dom, 500, seed=5)
    sd = dom.signed_distance(pts)
    assert np.max(np.abs(sd)) < 1e-9
    on_face = (
        np.isclose(pts[:, 0], 0)
        | np.isclose(pts[:, 0], 2)
        | np.isclose(pts[:, 1], 0)
        | np.isclose(pts[:, 1], 1)
    )
    assert on_face.all()


def test_sample_boundary_lshape():
    dom = lshape()
    pts = sample_boundary(dom, 800, seed=6)
    assert np.max(np.abs(dom.signed_distance(pts))) < 1e-9


def test_make_exhaustion_concentric_ball():
    dom = Ball(center=(0.0, 0.0), radius=1.0)
    offsets = [2.0 ** (-n - 1) for n in range(1, 5)]
    ex = make_exhaustion(dom, 4, offsets=offsets, seed=0)
    for n, (level, eps) in enumerate(zip(ex.levels, offsets), start=1):
        assert isinstance(level, Ball)
        assert level.radius == pytest.approx(1.0 - eps)
    # d_n = min(2^-(n+2), 1/n) for interior levels
    for n in range(1, 4):
        assert ex.gaps[n - 1] == pytest.approx(min(2.0 ** (-n - 2), 1.0 / n), rel=1e-3)
    # last level is gauged against the domain boundary itself
    assert ex.gaps[3] == pytest.approx(min(2.0 ** (-5), 0.25), rel=1e-3)


def test_make_exhaustion_single_level_uses_domain_side():
    dom = Ball(center=(0.0, 0.0), radius=1.0)
    ex = make_exhaustion(dom, 1, offsets=[0.25], seed=0)
    assert ex.gaps[0] == pytest.approx(0.25, rel=1e-3)


def test_make_exhaustion_box_offsets():
    dom = Box(lo=(0.0, 0.0), hi=(2.0, 1.0))
    ex = make_exhaustion(dom, 2, offsets=[0.2, 0.1], seed=0)
    v1 = ex.levels[0]
    assert isinstance(v1, Box)
    assert tuple(v1.lo) == (0.2, 0.2)
    assert tuple(v1.hi) == (1.8, 0.8)


def test_make_exhaustion_rejects_disconnecting_offsets():
    # U-shaped domain: a large offset evaporates the bridge piece
    dom = Union(
        parts=(
            Box(lo=(0.0, 0.0), hi=(1.0, 3.0)),
            Box(lo=(2.0, 0.0), hi=(3.0, 3.0)),
            Box(lo=(0.0, 0.0), hi=(3.0, 0.8)),
        )
    )
    with pytest.raises(ValueError, match="disconnect"):
        make_exhaustion(dom, 1, offsets=[0.45], seed=0)


def test_make_exhaustion_rejects_non_nested():
    dom = Ball(center=(0.0, 0.0), radius=1.0)
    with pytest.raises(ValueError):
        make_exhaustion(dom, 2, offsets=[0.2, 0.2], seed=0)


def test_exhaustion_nesting_property():
    dom = lshape(arm=1.0, thickness=0.6)
    ex = make_exhaustion(dom, 3, offsets=[0.2, 0.12, 0.05], seed=1)
    for n in range(len(ex.levels) - 1):
        pts = sample_boundary(ex.levels[n], 400, seed=50 + n)
        assert np.max(ex.levels[n + 1].signed_distance(pts)) < 0
