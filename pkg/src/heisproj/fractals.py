"""Finite point clouds standing in for the example sets.

Every cloud records the scale ``resolution`` at which it was generated.
Below roughly ten times that scale a finite sample is zero-dimensional, so
dimension estimators refuse smaller covering radii.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .heis import koranyi_dist

__all__ = [
    "PointCloud",
    "IfsSpec",
    "Axis",
    "MAX_POINTS",
    "cantor_vertical_line",
    "cantor_values",
    "product_set",
    "ifs_dust",
    "box_product_set",
    "axis_interval",
    "axis_cantor",
    "axis_point",
]

MAX_POINTS = 2**24


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points of H^n as an ``(N, 2n+1)`` array plus generation metadata."""

    points: np.ndarray
    resolution: float
    label: str = ""
    seed: int | None = None
    center: np.ndarray | None = field(default=None, repr=False)
    radius: float | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, ndmin=2)
        if pts.shape[0] == 0:
            raise ValueError("point cloud is empty")
        if pts.shape[1] < 3 or pts.shape[1] % 2 == 0:
            raise ValueError(f"points must have 2n+1 columns, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud has non-finite coordinates")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        c = pts.mean(axis=0) if self.center is None else np.asarray(self.center, dtype=float)
        rad = float(np.max(np.linalg.norm(pts - c, axis=1)))
        if self.radius is not None and rad > self.radius * (1 + 1e-12):
            raise ValueError(f"points leave the declared ball (radius {rad} > {self.radius})")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", rad if self.radius is None else float(self.radius))

    @property
    def n(self) -> int:
        return (self.points.shape[1] - 1) // 2

    def __len__(self):
        return self.points.shape[0]

    def with_points(self, pts, label: str | None = None) -> "PointCloud":
        return PointCloud(pts, self.resolution, self.label if label is None else label, self.seed)

    def negate(self) -> "PointCloud":
        """Image under ``(z, t) -> (-z, -t)``."""
        return self.with_points(-self.points, label=f"-({self.label})")

    def min_separation(self) -> float:
        if len(self) < 2:
            return math.inf
        d, _ = cKDTree(self.points).query(self.points, k=2)
        return float(d[:, 1].min())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "resolution", "label", "seed"])
        w.writerow([self.n, repr(self.resolution), self.label, "" if self.seed is None else self.seed])
        n = self.n
        w.writerow([f"x{j + 1}" for j in range(n)] + [f"y{j + 1}" for j in range(n)] + ["t"])
        for row in self.points:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PointCloud":
        rows = list(csv.reader(io.StringIO(text)))
        n, res, label, seed = rows[1]
        pts = np.array([[float(x) for x in r] for r in rows[3:]])
        if pts.shape[1] != 2 * int(n) + 1:
            raise ValueError("CSV column count does not match n")
        return cls(pts, float(res), label, int(seed) if seed else None)


@dataclass(frozen=True, eq=False)
class IfsSpec:
    """Similarity IFS ``x -> r_i x + b_i`` in R^d iterated ``depth`` times.

    The open set condition is not checked; callers choosing overlapping maps
    get clouds whose nominal dimension overstates the attractor's.
    """

    ratios: tuple
    translations: np.ndarray
    depth: int

    def __post_init__(self):
        r = tuple(float(x) for x in np.atleast_1d(self.ratios))
        b = np.array(self.translations, dtype=float, ndmin=2)
        if len(r) == 0 or b.shape[0] != len(r):
            raise ValueError("need one translation per contraction ratio")
        if not all(0 < x < 1 for x in r):
            raise ValueError("contraction ratios must lie in (0, 1)")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        object.__setattr__(self, "ratios", r)
        object.__setattr__(self, "translations", b)

    @classmethod
    def uniform(cls, ratio: float, translations, depth: int) -> "IfsSpec":
        b = np.array(translations, dtype=float, ndmin=2)
        return cls((ratio,) * b.shape[0], b, depth)

    @property
    def dim(self) -> int:
        return self.translations.shape[1]

    @property
    def count(self) -> int:
        return len(self.ratios) ** self.depth

    def similarity_dimension(self) -> float:
        """Solution ``a`` of ``sum r_i^a = 1``."""
        r = np.array(self.ratios)
        if len(r) == 1:
            return 0.0
        if np.all(r == r[0]):
            return math.log(len(r)) / math.log(1.0 / r[0])
        from scipy.optimize import brentq

        return brentq(lambda a: np.sum(r**a) - 1.0, 1e-9, 1e3)

    def attractor_diameter(self) -> float:
        """Upper bound ``diam(b) / (1 - max r)`` on the attractor diameter."""
        b = self.translations
        diam = max((np.linalg.norm(x - y) for x, y in itertools.combinations(b, 2)), default=0.0)
        return diam / (1.0 - max(self.ratios))

    def points(self) -> np.ndarray:
        if self.count > MAX_POINTS:
            raise ValueError(f"IFS would produce {self.count} points (cap {MAX_POINTS})")
        pts = np.zeros((1, self.dim))
        r = np.array(self.ratios)[:, None, None]
        for _ in range(self.depth):
            pts = (r * pts[None] + self.translations[:, None, :]).reshape(-1, self.dim)
        return pts

    def resolution(self) -> float:
        return max(self.ratios) ** self.depth * max(self.attractor_diameter(), 1e-300)


def ifs_dust(spec: IfsSpec, origin, frame, label: str = "ifs", resolution: float | None = None) -> PointCloud:
    """Attractor sample placed in H^n by ``x -> origin + x @ frame``.

    ``frame`` has shape ``(d, 2n+1)``; use orthonormal rows to keep the
    resolution meaningful.
    """
    origin = np.asarray(origin, dtype=float)
    frame = np.array(frame, dtype=float, ndmin=2)
    if frame.shape != (spec.dim, origin.size):
        raise ValueError(f"frame shape {frame.shape} does not match ({spec.dim}, {origin.size})")
    pts = origin + spec.points() @ frame
    if resolution is None:
        resolution = spec.resolution() * np.linalg.norm(frame, 2) if spec.count > 1 else 1.0
    return PointCloud(pts, resolution, label)


def cantor_values(ratio: float, depth: int, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    """Left endpoints of the ``2^depth`` level-``depth`` Cantor intervals in ``[a, b]``."""
    if not 0 < ratio <= 0.5:
        raise ValueError("ratio must lie in (0, 1/2]")
    if 2**depth > MAX_POINTS:
        raise ValueError(f"depth {depth} gives more than {MAX_POINTS} points")
    spec = IfsSpec.uniform(ratio, [[0.0], [1.0 - ratio]], depth)
    return a + (b - a) * np.sort(spec.points()[:, 0])


def cantor_vertical_line(ratio: float, depth: int, n: int = 1) -> PointCloud:
    """Cantor set on the vertical segment ``{(e_1, s) : |s| <= 1/4}``.

    Its Euclidean dimension is ``log 2 / log(1/ratio)`` and, since the
    Korányi distance along a vertical line is ``2 |ds|^(1/2)``, its
    Heisenberg dimension is twice that.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = cantor_values(ratio, depth, -0.25, 0.25)
    pts = np.zeros((t.size, 2 * n + 1))
    pts[:, 0] = 1.0
    pts[:, -1] = t
    res = 0.5 * ratio**depth * 0.5
    return PointCloud(pts, res, f"cantor_vertical(ratio={ratio},depth={depth},n={n})")


def _perp_directions(n: int, m: int) -> list[int]:
    """Coordinates spanning ``V_0^perp``, starting with ``e_0 = e_{n+1}``."""
    first = [n + j for j in range(m)]
    rest = [j for j in range(m, n)] + [n + j for j in range(m, n)]
    return first + rest


def product_set(
    alpha: float,
    n: int,
    m: int,
    depth: int,
    span: float = 1 / 36,
    t_length: float = 1 / 36,
    t_step: float | None = None,
) -> PointCloud:
    """``C_alpha x I`` near ``(e_0, 0)`` with ``e_0 = e_{n+1}`` in ``i V_0``.

    ``C_alpha`` is a self-similar dust with ``2^k`` corner maps in the first
    ``k = ceil(alpha)`` coordinates of ``V_0^perp`` (``e_0`` first), ratio
    ``2^(-k/alpha)`` and diameter ``span * sqrt(k)``; ``I`` is a uniform grid
    of step ``t_step`` (default: the dust resolution) on an interval of length
    ``t_length`` centred at 0.  Ideal dimensions: Euclidean ``alpha + 1``,
    Heisenberg ``alpha + 2``.  The whole set must fit in the Korányi ball of
    radius 1/4 around ``(e_0, 0)``.
    """
    if not (1 <= m <= n):
        raise ValueError("need 1 <= m <= n")
    if not (0 < alpha <= 2 * n - m):
        raise ValueError(f"alpha must lie in (0, {2 * n - m}]")
    k = math.ceil(alpha - 1e-12)
    ratio = 2.0 ** (-k / alpha)
    corners = np.array(list(itertools.product([0.0, 1.0], repeat=k))) * (1.0 - ratio)
    spec = IfsSpec.uniform(ratio, corners, depth)
    dust = (spec.points() - 0.5) * span  # attractor of the corner IFS is [0, 1]^k
    dust_res = span * ratio**depth
    step = dust_res if t_step is None else float(t_step)
    nt = int(round(t_length / step)) + 1
    if dust.shape[0] * nt > MAX_POINTS:
        raise ValueError("product set exceeds the point cap")
    t = np.linspace(-t_length / 2, t_length / 2, nt)
    dirs = _perp_directions(n, m)[:k]
    base = np.zeros((dust.shape[0], 2 * n + 1))
    base[:, n] = 1.0
    for j, col in enumerate(dirs):
        base[:, col] += dust[:, j]
    pts = np.repeat(base, nt, axis=0)
    pts[:, -1] = np.tile(t, dust.shape[0])
    e0 = np.zeros(2 * n + 1)
    e0[n] = 1.0
    if np.max(koranyi_dist(pts, e0)) > 0.25:
        raise ValueError("product set leaves the Korányi ball B((e_0, 0), 1/4)")
    res = max(dust_res, t_length / (nt - 1)) if nt > 1 else dust_res
    return PointCloud(pts, res, f"product(alpha={alpha:.6g},n={n},m={m},depth={depth})")


# ------------------------------------------------------------ box products


@dataclass(frozen=True, eq=False)
class Axis:
    """One coordinate factor of a box product: values and their spacing."""

    values: np.ndarray
    resolution: float | None
    ideal_dim: float


def axis_interval(a: float, b: float, num: int) -> Axis:
    v = np.linspace(a, b, num)
    return Axis(v, (b - a) / (num - 1), 1.0)


def axis_cantor(ratio: float, depth: int, a: float = 0.0, b: float = 1.0) -> Axis:
    v = cantor_values(ratio, depth, a, b)
    return Axis(v, (b - a) * ratio**depth, math.log(2) / math.log(1 / ratio))


def axis_point(x: float = 0.0) -> Axis:
    return Axis(np.array([float(x)]), None, 0.0)


def box_product_set(axes, label: str = "box_product") -> PointCloud:
    """Cartesian product of per-coordinate samples (one axis per coordinate)."""
    axes = list(axes)
    if len(axes) < 3 or len(axes) % 2 == 0:
        raise ValueError("need 2n+1 axes")
    if any(ax.values.size == 0 for ax in axes):
        raise ValueError("box product with an empty axis")
    count = math.prod(ax.values.size for ax in axes)
    if count > MAX_POINTS:
        raise ValueError(f"box product has {count} points (cap {MAX_POINTS})")
    res = [ax.resolution for ax in axes if ax.resolution is not None]
    if not res:
        return PointCloud(np.array([[ax.values[0] for ax in axes]]), 1.0, label)
    if max(res) > 4 * min(res):
        raise ValueError("axis resolutions differ by more than a factor 4")
    grids = np.meshgrid(*[ax.values for ax in axes], indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    return PointCloud(pts, max(res), label)
