import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisproj.dimension import (
    DimensionEstimate,
    MetricKind,
    dimension_comparison_check,
    energy_mc,
    estimate_dim,
    net_count,
    net_traversal,
)
from heisproj.fractals import IfsSpec, PointCloud, cantor_vertical_line, ifs_dust, product_set
from heisproj.grassmann import PlaneSampler, haar_unitary, proj_right_coset, unitary_to_orthogonal

# mean |s - t|^(-1/2) over distinct pairs of the 10^4-point grid on [0, 1]
GRID_ENERGY_HALF = 2.637591873487087
LOG2_3 = math.log(2) / math.log(3)


def greedy_input_order(pts, r):
    centres = []
    for p in pts:
        if all(np.linalg.norm(p - c) > r for c in centres):
            centres.append(p)
    return len(centres)


def test_input_order_greedy_is_not_monotone():
    # a plain scan can grow with r; the farthest-point order cannot
    pts = np.array([[1.5, 2.0], [1.0, 1.0], [1.5, 0.5], [0.0, 1.0], [2.0, 1.0], [0.5, 1.0]])
    assert greedy_input_order(pts, 1.0) == 2 and greedy_input_order(pts, 1.2) == 3
    cloud = np.column_stack([pts, np.zeros(6)])
    assert net_count(cloud, MetricKind.euclidean(), 1.0) >= net_count(cloud, MetricKind.euclidean(), 1.2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["euclidean", "koranyi"]))
def test_counts_monotone(seed, tag):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (rng.integers(2, 200), 3))
    trav = net_traversal(pts, MetricKind(tag), 1e-3)
    scales = np.geomspace(2.0, 1e-3, 40)
    counts = [trav.count(r) for r in scales]
    assert np.all(np.diff(counts) >= 0)
    assert counts[-1] <= len(pts)


def test_traversal_is_a_net():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (500, 3))
    m = MetricKind.koranyi()
    trav = net_traversal(pts, m, 0.05)
    for r in (0.5, 0.2, 0.1):
        c = trav.order[: trav.count(r)]
        d = m.dist(pts[:, None, :], pts[None, c, :])
        # every point covered, centres pairwise separated
        assert np.all(d.min(axis=1) <= r)
        dc = d[c]
        assert np.all(dc[~np.eye(len(c), dtype=bool)] > r)


def test_net_count_segment():
    seg = np.zeros((1001, 3))
    seg[:, 0] = np.linspace(0, 1, 1001)
    k = net_count(seg, MetricKind.euclidean(), 0.1)
    assert 5 <= k <= 21
    with pytest.raises(ValueError):
        net_count(seg, MetricKind.euclidean(), 0.0)


def test_scaled_metric_shifts_counts_not_slope():
    cloud = cantor_vertical_line(1 / 3, 9)
    lo, hi = 3.0**-6, 3.0**-1
    base = estimate_dim(cloud, MetricKind.euclidean(), lo, hi, levels=26)
    sc = estimate_dim(cloud, MetricKind.euclidean().scaled(2.0), lo, hi, levels=26)
    assert abs(base.slope - sc.slope) <= 2 * (base.stderr + sc.stderr) + 0.05


def test_unitary_isometry_invariance():
    rng = np.random.default_rng(1)
    cloud = product_set(1.5, 2, 1, 4)
    R = unitary_to_orthogonal(haar_unitary(rng, 2))
    moved = cloud.with_points(np.column_stack([cloud.points[:, :-1] @ R.T, cloud.points[:, -1]]))
    m = MetricKind.koranyi()
    for r in (0.02, 0.05, 0.1):
        assert net_count(cloud, m, r) == net_count(moved, m, r)


@pytest.mark.parametrize("ratio,depth", [(1 / 3, 10), (1 / 4, 8)])
def test_self_similar_euclidean(ratio, depth):
    cloud = cantor_vertical_line(ratio, depth)
    target = math.log(2) / math.log(1 / ratio)
    est = estimate_dim(cloud, MetricKind.euclidean(), 10 * cloud.resolution / ratio, 0.5 * ratio, levels=26)
    assert abs(est.slope - target) <= 0.08 + 2 * est.stderr


def test_self_similar_planar_dust():
    spec = IfsSpec.uniform(1 / 3, [[0, 0], [2 / 3, 0], [0, 2 / 3], [2 / 3, 2 / 3]], 6)
    frame = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    cloud = ifs_dust(spec, [0, 0, 0], frame)
    est = estimate_dim(cloud, MetricKind.euclidean(), 10 * cloud.resolution, 0.3, levels=20)
    assert abs(est.slope - 2 * LOG2_3) <= 0.08 + 2 * est.stderr


def test_koranyi_doubles_vertical_cantor():
    cloud = cantor_vertical_line(1 / 3, 10)
    est = estimate_dim(cloud, MetricKind.koranyi(), 2 * 3.0**-3.5, 2 * 3.0**-1, levels=26)
    assert abs(est.slope - 2 * LOG2_3) <= 0.1


def test_estimate_preconditions():
    cloud = cantor_vertical_line(1 / 3, 6)
    e = MetricKind.euclidean()
    with pytest.raises(ValueError, match="levels"):
        estimate_dim(cloud, e, 0.01, 0.1, levels=4)
    with pytest.raises(ValueError, match="resolution"):
        estimate_dim(cloud, e, cloud.resolution, 0.1)
    with pytest.raises(ValueError, match="diameter"):
        estimate_dim(cloud, e, 0.01, 5.0)
    with pytest.raises(ValueError, match="window"):
        estimate_dim(cloud, e, 0.01, 0.1, window=(0, 1))
    V = PlaneSampler(1, 1, 0).sample()
    big = PointCloud(proj_right_coset(V, np.random.default_rng(0).uniform(-1, 1, (9000, 3))), 1e-4)
    with pytest.raises(ValueError, match="capped"):
        estimate_dim(big, MetricKind.quotient(V), 0.01, 0.1)


def test_estimate_json_roundtrip():
    cloud = cantor_vertical_line(1 / 3, 6)
    est = estimate_dim(cloud, MetricKind.euclidean(), 0.01, 0.1, levels=7)
    assert est.window == (1, 6)
    assert DimensionEstimate.from_json(est.to_json()) == est


def test_energy_two_points():
    cloud = PointCloud(np.array([[0, 0, 0], [1, 0, 0.0]]), 1.0)
    assert energy_mc(cloud, 1.5, MetricKind.euclidean(), pairs=10**4) == pytest.approx(1.0)


def test_energy_grid_and_dilation():
    seg = np.zeros((10**4, 3))
    seg[:, 0] = np.linspace(0, 1, 10**4)
    cloud = PointCloud(seg, 1e-4)
    e = energy_mc(cloud, 0.5, MetricKind.euclidean(), pairs=10**6, seed=3)
    assert e == pytest.approx(GRID_ENERGY_HALF, rel=0.02)
    # Korányi dilation by r scales every distance by r, so energy by r^(-s)
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1, 1, (300, 3))
    big = PointCloud(pts * np.array([2.0, 2.0, 4.0]), 1.0)
    k = MetricKind.koranyi()
    e1 = energy_mc(PointCloud(pts, 1.0), 1.2, k, pairs=10**4, seed=5)
    e2 = energy_mc(big, 1.2, k, pairs=10**4, seed=5)
    assert e2 == pytest.approx(2.0**-1.2 * e1, rel=1e-12)
    with pytest.raises(ValueError):
        energy_mc(cloud, 0.5, k, pairs=100)


def test_comparison_vertical_and_horizontal():
    vert = cantor_vertical_line(1 / 3, 10)
    out = dimension_comparison_check(vert, (3.0**-7, 3.0**-2), (2 * 3.0**-3.5, 2 * 3.0**-1), levels=26)
    assert out["holds"]
    assert out["dim_heisenberg"]["slope"] == pytest.approx(2 * out["dim_euclidean"]["slope"], abs=0.15)
    seg = np.zeros((1001, 3))
    seg[:, 0] = np.linspace(0, 1, 1001)
    horiz = PointCloud(seg, 1e-3)
    out = dimension_comparison_check(horiz, (0.01, 0.25), (0.01, 0.25), levels=16)
    assert out["holds"]
    # few centres at the top of the ladder bias the slope low
    assert out["dim_euclidean"]["slope"] == pytest.approx(1.0, abs=0.1)
    assert out["dim_heisenberg"]["slope"] == pytest.approx(1.0, abs=0.1)

