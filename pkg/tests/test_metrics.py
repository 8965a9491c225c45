import io

import numpy as np
import pytest
from scipy.optimize import minimize

from heisproj.grassmann import PlaneSampler, canonical_plane, plane_from_angle, proj_right_coset
from heisproj.heis import dilate, euclid_dist, group_mul, koranyi_dist
from heisproj.metrics import (
    GrushinPoint,
    HeisPath,
    NotInVerticalSubgroupError,
    PlanarPath,
    QuotientMetricOptions,
    grushin_dist,
    grushin_length,
    grushin_lift,
    heis_horizontal_length,
    horizontality_defect,
    project_to_grushin,
    quotient_dist,
    read_path_csv,
    write_path_csv,
)

# min over w of (w^4 + 16 (w - 1)^2)^(1/4): dense 1-D grid, step 1e-5 on [-4, 4]
QUOTIENT_ORACLE_GRID = 0.9501831371497739
# same minimum from the real root of w^3 + 8 w - 8 = 0
QUOTIENT_ORACLE_ROOT = 0.9501831370151864


def brute_quotient(V, p, q):
    """Direct minimisation of koranyi_dist((w, 0) * p, q) over w in V (grid, then Nelder-Mead)."""
    B = V.basis

    def obj(a):
        w = np.append(a @ B, 0.0)
        return koranyi_dist(group_mul(w, p), q)

    R = 2 * (np.linalg.norm(p[:-1] - q[:-1]) + koranyi_dist(p, q))
    g = np.linspace(-R, R, 161)
    mesh = np.stack(np.meshgrid(*([g] * V.m), indexing="ij"), -1).reshape(-1, V.m)
    W = np.concatenate([mesh @ B, np.zeros((len(mesh), 1))], axis=1)
    vals = koranyi_dist(group_mul(W, p), q)
    a0 = mesh[np.argmin(vals)]
    res = minimize(obj, a0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return min(res.fun, vals.min())


def test_quotient_oracle_case():
    V = canonical_plane(1, 1)
    d = quotient_dist(V, [0.0, 1.0, 0.0], [0.0, 1.0, 1.0])
    assert abs(d - QUOTIENT_ORACLE_GRID) / QUOTIENT_ORACLE_GRID < 1e-4
    assert d == pytest.approx(QUOTIENT_ORACLE_ROOT, rel=1e-10)


def test_quotient_trivial_and_errors():
    V = canonical_plane(1, 1)
    assert quotient_dist(V, [0, 0.3, 0.2], [0, 0.3, 0.2]) == 0.0
    with pytest.raises(NotInVerticalSubgroupError):
        quotient_dist(V, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        QuotientMetricOptions(coarse_grid_points_per_axis=5)
    with pytest.raises(ValueError):
        QuotientMetricOptions(refine_iters=10)
    with pytest.raises(ValueError):
        QuotientMetricOptions(radius_slack=0.5)


@pytest.mark.parametrize("n,m,seed", [(1, 1, 0), (2, 1, 1), (2, 2, 2), (3, 2, 3)])
def test_quotient_matches_brute_force(n, m, seed):
    rng = np.random.default_rng(seed)
    V = PlaneSampler(n, m, seed).sample()
    for _ in range(6):
        p, q = proj_right_coset(V, rng.standard_normal((2, 2 * n + 1)))
        assert quotient_dist(V, p, q) == pytest.approx(brute_quotient(V, p, q), rel=1e-6, abs=1e-9)


def test_quotient_dominance_symmetry_homogeneity():
    rng = np.random.default_rng(4)
    V = PlaneSampler(2, 2, 9).sample()
    p, q = proj_right_coset(V, rng.standard_normal((2, 4000, 5)))
    d = quotient_dist(V, p, q)
    assert np.all(d <= koranyi_dist(p, q) + 1e-9)
    assert np.allclose(quotient_dist(V, q, p), d, rtol=1e-6, atol=1e-12)
    for r in (0.25, 4.0):
        dr = quotient_dist(V, dilate(r, p), dilate(r, q))
        assert np.max(np.abs(dr - r * d) / (r * d)) <= 1e-3
    # Euclidean separation of the z-parts is a lower bound
    assert np.all(d >= np.linalg.norm(p[:, :-1] - q[:, :-1], axis=1) - 1e-12)


def test_quotient_sharpness_pair():
    # vertical points over e_1 project to pairs at quotient distance ~ |s - t|
    V = plane_from_angle(1.1)  # |omega(e_1, w)| = sin(1.1) > 1/2
    rng = np.random.default_rng(5)
    s, t = rng.uniform(-0.25, 0.25, (2, 2000))
    P = proj_right_coset(V, np.column_stack([np.ones_like(s), np.zeros_like(s), s]))
    Q = proj_right_coset(V, np.column_stack([np.ones_like(t), np.zeros_like(t), t]))
    ratio = quotient_dist(V, P, Q) / np.abs(s - t)
    assert 0.1 <= ratio.min() and ratio.max() <= 10


def test_embedded_lower_rank_orbit():
    # n = 2, V_0 = span(e_1): on {(0, x2, 0, y2, t)} the quotient metric is comparable to H^1
    V = canonical_plane(2, 1)
    rng = np.random.default_rng(6)
    a, b = rng.uniform(-1, 1, (2, 3000, 3))
    emb = lambda x: np.column_stack([np.zeros(len(x)), x[:, 0], np.zeros(len(x)), x[:, 1], x[:, 2]])  # noqa: E731
    ratio = quotient_dist(V, emb(a), emb(b)) / koranyi_dist(a, b)
    assert 1 / 4 <= ratio.min() and ratio.max() <= 1 + 1e-9


def test_orbit_away_from_critical_set_not_bilipschitz():
    # over z = e_{n+1} the quotient distance is ~|dt| while Korányi is 2|dt|^(1/2)
    V = canonical_plane(1, 1)
    ratios = []
    for dt in np.logspace(-1, -5, 5):
        p, q = np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0, dt])
        ratios.append(quotient_dist(V, p, q) / koranyi_dist(p, q))
    assert np.all(np.diff(ratios) < 0) and ratios[-1] < 0.1


def test_local_lipschitz_identity():
    V = PlaneSampler(2, 1, 11).sample()
    rng = np.random.default_rng(7)

    def sample(k):
        x = proj_right_coset(V, rng.uniform(-1, 1, (k, 5)))
        return x[np.linalg.norm(x, axis=1) <= 2]

    def q99(k):
        a, b = sample(k), sample(k)
        j = min(len(a), len(b))
        r = euclid_dist(a[:j], b[:j]) / quotient_dist(V, a[:j], b[:j])
        return np.quantile(r, 0.99)

    k1, k2 = q99(10**4), q99(2 * 10**4)
    assert np.isfinite(k1) and abs(k2 - k1) / k1 < 0.2


# --------------------------------------------------------------- Grushin


def test_grushin_examples():
    assert grushin_dist(GrushinPoint(0, 0), GrushinPoint(0, 1)) == 1.0
    assert grushin_dist([1, 0], [1, 1]) == 1.0
    assert grushin_dist([0, 0], [2, 0]) == 2.0


def test_grushin_pair_axioms_and_homogeneity():
    rng = np.random.default_rng(8)
    a, b = rng.uniform(-2, 2, (2, 10**4, 2))
    d = grushin_dist(a, b)
    assert np.all(d > 0) and np.array_equal(d, grushin_dist(b, a))
    assert np.all(grushin_dist(a, a) == 0)
    for r in (0.5, 2.0, 8.0):  # powers of two keep the scaling exact in floating point
        s = np.array([r, r * r])
        assert np.array_equal(grushin_dist(a * s, b * s), r * d)


def test_grushin_quasi_triangle():
    # the comparable distance is only a quasi-metric; its constant stays small
    rng = np.random.default_rng(9)
    a, b, c = rng.uniform(-1, 1, (3, 10**5, 2))
    assert np.all(grushin_dist(a, c) <= 2 * (grushin_dist(a, b) + grushin_dist(b, c)))


def test_quotient_grushin_comparable():
    V = canonical_plane(1, 1)
    rng = np.random.default_rng(10)
    a, b = rng.uniform(-1, 1, (2, 10**4, 2))
    lift = lambda x: np.column_stack([np.zeros(len(x)), x])  # noqa: E731
    ratio = quotient_dist(V, lift(a), lift(b)) / grushin_dist(a, b)
    assert 0.1 <= ratio.min() and ratio.max() <= 10


def test_length_examples():
    seg = PlanarPath.from_function(lambda s: (1 + s, 0 * s))
    assert grushin_length(seg) == pytest.approx(1.0, abs=1e-9)
    vert = PlanarPath.from_function(lambda s: (1 + 0 * s, s))
    assert grushin_length(vert) == pytest.approx(1.0, abs=1e-9)
    lift = grushin_lift(vert)
    assert np.allclose(lift.samples[:, 0], -np.linspace(0, 1, 1001), atol=1e-12)
    assert heis_horizontal_length(lift) == pytest.approx(1.0, abs=1e-6)
    flat = grushin_lift(seg)
    assert np.all(flat.samples[:, 0] == 0) and np.all(flat.samples[:, 2] == 0)
    xaxis = HeisPath(np.column_stack([np.linspace(0, 1, 1001), np.zeros(1001), np.zeros(1001)]))
    assert heis_horizontal_length(xaxis) == pytest.approx(1.0, abs=1e-9)


def test_length_dilation():
    rng = np.random.default_rng(11)
    c = rng.standard_normal(4)
    path = PlanarPath.from_function(lambda s: (1.5 + 0.3 * np.sin(3 * s + c[0]), c[1] * s + c[2] * s * s))
    for r in (0.5, 3.0):
        assert grushin_length(path.dilate(r)) == pytest.approx(r * grushin_length(path), abs=1e-8)
        lift = grushin_lift(path)
        assert heis_horizontal_length(lift.dilate(r)) == pytest.approx(r * heis_horizontal_length(lift), abs=1e-8)


def test_lift_roundtrip_and_lengths():
    rng = np.random.default_rng(12)
    for _ in range(20):
        a = rng.standard_normal(5)
        path = PlanarPath.from_function(
            lambda s: (np.sign(a[0]) * (1 + 0.5 * np.cos(2 * s + a[1])), a[2] * np.sin(4 * s) + a[3] * s))
        lift = grushin_lift(path)
        assert horizontality_defect(lift) <= 1e-6
        assert np.max(np.abs(project_to_grushin(lift).samples - path.samples)) <= 1e-9
        assert heis_horizontal_length(lift) == pytest.approx(grushin_length(path), abs=1e-6)


def test_singular_line_rejected():
    crossing = PlanarPath.from_function(lambda s: (s - 0.5, s))
    with pytest.raises(ValueError):
        grushin_length(crossing)
    with pytest.raises(ValueError):
        grushin_lift(crossing)
    # touching v = 0 only at an endpoint with tau at rest is fine
    touch = PlanarPath.from_function(lambda s: (s, 0 * s))
    assert grushin_length(touch) == pytest.approx(1.0)


def test_non_horizontal_rejected():
    bad = HeisPath(np.column_stack([np.zeros(11), np.zeros(11), np.linspace(0, 1, 11)]))
    with pytest.raises(ValueError):
        heis_horizontal_length(bad)


def test_path_csv_roundtrip():
    path = PlanarPath.from_function(lambda s: (1 + s, s * s), num=11)
    buf = io.StringIO()
    write_path_csv(path, buf)
    back = read_path_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.samples, path.samples)
