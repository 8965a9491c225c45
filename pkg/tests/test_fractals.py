import math

import numpy as np
import pytest

from heisproj.fractals import (
    MAX_POINTS,
    IfsSpec,
    PointCloud,
    axis_cantor,
    axis_interval,
    axis_point,
    box_product_set,
    cantor_values,
    cantor_vertical_line,
    ifs_dust,
    product_set,
)
from heisproj.heis import koranyi_dist


def test_cantor_values_small():
    assert np.allclose(cantor_values(1 / 3, 1), [0, 2 / 3])
    assert np.allclose(cantor_values(1 / 3, 2), [0, 2 / 9, 2 / 3, 8 / 9])
    v = cantor_values(0.25, 3, -1, 1)
    assert v.size == 8 and v.min() == -1 and np.all(np.diff(v) > 0)


def test_cantor_vertical_line():
    c = cantor_vertical_line(1 / 3, 5, n=2)
    assert len(c) == 32 and c.n == 2
    assert np.all(c.points[:, 0] == 1) and np.all(c.points[:, 1:4] == 0)
    assert c.points[:, -1].min() >= -0.25 and c.points[:, -1].max() <= 0.25
    assert c.resolution == pytest.approx(3.0**-5 / 4)
    assert c.min_separation() >= c.resolution / 4


def test_ifs_similarity_dimension():
    spec = IfsSpec.uniform(1 / 3, [[0.0], [2 / 3]], 4)
    assert spec.similarity_dimension() == pytest.approx(math.log(2) / math.log(3))
    # unequal ratios: 1/2 + 1/4 + 1/4 = 1 at a = 1
    mixed = IfsSpec((0.5, 0.25, 0.25), [[0.0], [0.5], [0.75]], 3)
    assert mixed.similarity_dimension() == pytest.approx(1.0, abs=1e-9)
    assert mixed.count == 27 and mixed.points().shape == (27, 1)


def test_ifs_dust_frame_and_resolution():
    spec = IfsSpec.uniform(0.25, [[0, 0], [0.75, 0], [0, 0.75], [0.75, 0.75]], 4)
    frame = np.zeros((2, 3))
    frame[0, 0] = frame[1, 2] = 0.5
    c = ifs_dust(spec, [0, 0, 0], frame)
    assert len(c) == 256
    assert np.all(c.points[:, 1] == 0)
    assert c.resolution == pytest.approx(0.25**4 * spec.attractor_diameter() * 0.5)
    assert c.min_separation() >= c.resolution / 4
    with pytest.raises(ValueError):
        ifs_dust(spec, [0, 0, 0], np.zeros((3, 3)))


def test_product_set_geometry():
    c = product_set(1.5, 2, 1, 3)
    e0 = np.array([0, 0, 1.0, 0, 0])
    assert np.max(koranyi_dist(c.points, e0)) <= 0.25
    # only e_{n+1} (= e_0 direction) and x_2 carry the dust; y_2 is constant
    assert np.all(c.points[:, 3] == 0)
    assert np.ptp(c.points[:, 1]) > 0 and np.ptp(c.points[:, 2]) > 0
    assert c.min_separation() >= c.resolution / 4


def test_box_product():
    c = box_product_set([axis_interval(0, 1, 5), axis_point(), axis_cantor(1 / 3, 1, 0, 1)])
    assert len(c) == 5 * 2 and c.resolution == pytest.approx(1 / 3)
    with pytest.raises(ValueError, match="factor 4"):
        box_product_set([axis_interval(0, 1, 101), axis_point(), axis_interval(0, 1, 3)])
    with pytest.raises(ValueError):
        box_product_set([axis_point(), axis_point()])


def test_deterministic():
    a, b = product_set(1.2, 2, 1, 4), product_set(1.2, 2, 1, 4)
    assert np.array_equal(a.points, b.points)


def test_reflection_closure():
    c = cantor_vertical_line(1 / 3, 4)
    neg = c.negate()
    assert np.array_equal(neg.points, -c.points) and neg.resolution == c.resolution
    assert np.array_equal(neg.negate().points, c.points)


def test_csv_roundtrip():
    c = product_set(1.5, 2, 1, 2)
    back = PointCloud.from_csv(c.to_csv())
    assert np.array_equal(back.points, c.points)
    assert back.resolution == c.resolution and back.label == c.label


def test_errors():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((0, 3)), 1.0)
    with pytest.raises(ValueError):
        PointCloud(np.zeros((2, 4)), 1.0)
    with pytest.raises(ValueError):
        PointCloud(np.zeros((2, 3)), 0.0)
    with pytest.raises(ValueError, match="declared ball"):
        PointCloud(np.array([[0, 0, 0], [3, 0, 0.0]]), 1.0, center=np.zeros(3), radius=1.0)
    with pytest.raises(ValueError):
        cantor_values(0.6, 3)
    with pytest.raises(ValueError):
        cantor_values(1 / 3, int(math.log2(MAX_POINTS)) + 1)
    with pytest.raises(ValueError):
        product_set(2.5, 1, 1, 2)
    with pytest.raises(ValueError):
        IfsSpec((1.2,), [[0.0]], 2)
