"""Covering-number dimension estimates and Monte Carlo energies.

Net counts come from one farthest-point traversal per cloud.  Taking the
points in farthest-point order (start at index 0, ties to the lowest index)
and scanning greedily keeps exactly the prefix whose insertion radius
exceeds ``r``.  That makes the count exactly nonincreasing in ``r`` and gives
every scale of a ladder from a single pass.  A plain scan in input order
does not have this property.

A KD-tree on coordinates whose Euclidean distance is a lower bound for the
chosen metric prunes candidates: ``|dz|`` for Korányi and quotient
distances, all coordinates for Euclidean, ``|dv|`` for Grushin.

Box counting here is an upper-box-dimension surrogate for Hausdorff
dimension; for the self-similar examples used in the experiments the two
agree.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

from .fractals import PointCloud
from .grassmann import IsotropicPlane
from .heis import euclid_dist, koranyi_dist
from .metrics import DEFAULT_OPTIONS, QuotientMetricOptions, grushin_dist, quotient_dist

__all__ = [
    "MetricKind",
    "DimensionEstimate",
    "NetTraversal",
    "QUOTIENT_POINT_CAP",
    "net_traversal",
    "net_count",
    "estimate_dim",
    "max_dist_from_first",
    "energy_mc",
    "dimension_comparison_check",
]

QUOTIENT_POINT_CAP = 2**13
GRUSHIN_TOL = 1e-12
_BLOCK = 256
_TAGS = ("euclidean", "koranyi", "quotient", "grushin")


@dataclass(frozen=True, eq=False)
class MetricKind:
    """Which distance to count with.

    ``quotient`` needs a plane and points of ``V^perp x R``; ``grushin``
    takes planar ``(v, tau)`` points, or H^1 points with ``x = 0`` read as
    ``(y, t)``.
    """

    tag: str
    plane: IsotropicPlane | None = None
    opts: QuotientMetricOptions = field(default=DEFAULT_OPTIONS)
    scale: float = 1.0

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown metric {self.tag!r}")
        if (self.tag == "quotient") != (self.plane is not None):
            raise ValueError("a plane is required for, and only for, the quotient metric")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def euclidean(cls):
        return cls("euclidean")

    @classmethod
    def koranyi(cls):
        return cls("koranyi")

    @classmethod
    def quotient(cls, plane: IsotropicPlane, opts: QuotientMetricOptions | None = None):
        return cls("quotient", plane, opts or DEFAULT_OPTIONS)

    @classmethod
    def grushin(cls):
        return cls("grushin")

    def scaled(self, factor: float) -> "MetricKind":
        """The metric ``factor * d`` (used for bi-Lipschitz checks)."""
        return MetricKind(self.tag, self.plane, self.opts, self.scale * factor)

    def __str__(self):
        return self.tag if self.scale == 1.0 else f"{self.scale!r}*{self.tag}"

    def prepare(self, points) -> np.ndarray:
        """Validate and convert raw coordinates to the metric's working form."""
        a = np.asarray(points, dtype=float)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array of points")
        if self.tag == "grushin":
            if a.shape[1] == 3:
                if np.any(np.abs(a[:, 0]) > GRUSHIN_TOL):
                    raise ValueError("Grushin points from H^1 must have x = 0")
                a = a[:, 1:]
            if a.shape[1] != 2:
                raise ValueError("the Grushin metric needs 2-D inputs")
            return a
        if a.shape[1] < 3 or a.shape[1] % 2 == 0:
            raise ValueError(f"points must have 2n+1 coordinates, got {a.shape[1]}")
        if self.tag == "quotient" and a.shape[1] != 2 * self.plane.n + 1:
            raise ValueError("points do not match the plane's ambient dimension")
        return a

    def lower_bound_coords(self, a: np.ndarray) -> np.ndarray:
        """Coordinates whose Euclidean distance never exceeds the metric."""
        if self.tag == "euclidean":
            out = a
        elif self.tag == "grushin":
            out = a[:, :1]
        else:
            out = a[:, :-1]
        return out * self.scale

    def dist(self, p, q):
        """Distance between prepared points, broadcasting."""
        if self.tag == "euclidean":
            d = euclid_dist(p, q)
        elif self.tag == "koranyi":
            d = koranyi_dist(p, q)
        elif self.tag == "quotient":
            d = quotient_dist(self.plane, p, q, self.opts)
        else:
            d = grushin_dist(p, q)
        return d * self.scale


@dataclass(frozen=True)
class NetTraversal:
    """Farthest-point order and insertion radii (first radius is ``inf``)."""

    order: np.ndarray
    radii: np.ndarray
    r_min: float

    def count(self, r: float) -> int:
        if r < self.r_min:
            raise ValueError(f"traversal only resolved down to r={self.r_min}")
        # radii are nonincreasing; count those strictly above r
        return int(np.searchsorted(-self.radii, -r, side="left"))


def net_traversal(points, metric: MetricKind, r_min: float) -> NetTraversal:
    """Farthest-point traversal stopped once every point is within ``r_min``."""
    a = metric.prepare(points)
    lb = metric.lower_bound_coords(a)
    tree = cKDTree(lb)
    N = a.shape[0]
    # distances to the current centres, padded to whole blocks; block maxima
    # make the argmax cost proportional to the blocks a step actually touched
    nblk = -(-N // _BLOCK)
    mind = np.full(nblk * _BLOCK, -np.inf)
    mind[:N] = metric.dist(a[0], a)
    mind[0] = 0.0
    blocks = mind.reshape(nblk, _BLOCK)
    bmax = blocks.max(axis=1)
    order, radii = [0], [np.inf]
    while True:
        b = int(np.argmax(bmax))
        i = b * _BLOCK + int(np.argmax(blocks[b]))
        r = float(mind[i])
        if r <= r_min:
            break
        order.append(i)
        radii.append(r)
        # any point whose nearest-centre distance can drop lies within r in the bound coords
        cand = np.asarray(tree.query_ball_point(lb[i], r), dtype=np.intp)
        cand = cand[mind[cand] > 0.0]
        if cand.size:
            mind[cand] = np.minimum(mind[cand], metric.dist(a[i], a[cand]))
        mind[i] = 0.0
        touched = np.unique(np.append(cand, i) // _BLOCK)
        bmax[touched] = blocks[touched].max(axis=1)
    return NetTraversal(np.array(order), np.array(radii), float(r_min))


def net_count(cloud, metric: MetricKind, r: float) -> int:
    """Size of the greedy ``r``-net taken in farthest-point order."""
    if not r > 0:
        raise ValueError("r must be positive")
    pts = cloud.points if isinstance(cloud, PointCloud) else cloud
    return net_traversal(pts, metric, r).count(r)


@dataclass(frozen=True)
class DimensionEstimate:
    scales: tuple
    counts: tuple
    slope: float
    stderr: float
    window: tuple
    label: str = ""
    metric: str = ""
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "metric": self.metric,
            "scales": [float(s) for s in self.scales],
            "counts": [int(c) for c in self.counts],
            "slope": float(self.slope),
            "stderr": float(self.stderr),
            "window": list(self.window),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DimensionEstimate":
        d = json.loads(text)
        return cls(tuple(d["scales"]), tuple(d["counts"]), d["slope"], d["stderr"],
                   tuple(d["window"]), d["label"], d["metric"], d["seed"])


def estimate_dim(
    cloud: PointCloud,
    metric: MetricKind,
    scale_lo: float,
    scale_hi: float,
    levels: int = 8,
    window: tuple | None = None,
) -> DimensionEstimate:
    """Slope of ``log N(r)`` against ``log(1/r)`` on a geometric ladder.

    With ``levels >= 7`` the largest and smallest scales are left out of the
    fit unless ``window`` (a ``(start, stop)`` index range) says otherwise.
    """
    if levels < 5:
        raise ValueError("need at least 5 levels")
    if not (0 < scale_lo < scale_hi):
        raise ValueError("need 0 < scale_lo < scale_hi")
    if scale_lo < 10 * cloud.resolution * (1 - 1e-12):
        raise ValueError(f"scale_lo={scale_lo} is below 10x the cloud resolution {cloud.resolution}")
    if metric.tag == "quotient" and len(cloud) > QUOTIENT_POINT_CAP:
        raise ValueError(f"quotient-metric clouds are capped at {QUOTIENT_POINT_CAP} points")
    if scale_hi > 2 * max_dist_from_first(cloud, metric) * (1 + 1e-12):
        raise ValueError(f"scale_hi={scale_hi} exceeds the cloud diameter")
    if window is None:
        window = (1, levels - 1) if levels >= 7 else (0, levels)
    if not (0 <= window[0] and window[1] <= levels and window[1] - window[0] >= 2):
        raise ValueError(f"bad regression window {window}")
    trav = net_traversal(cloud.points, metric, scale_lo)
    scales = np.geomspace(scale_hi, scale_lo, levels)
    counts = np.array([trav.count(s) for s in scales])
    w = slice(*window)
    fit = linregress(np.log(scales[w]), np.log(counts[w]))
    return DimensionEstimate(
        tuple(float(s) for s in scales),
        tuple(int(c) for c in counts),
        float(-fit.slope),
        float(fit.stderr),
        tuple(int(x) for x in window),
        cloud.label,
        str(metric),
        cloud.seed,
    )


def max_dist_from_first(cloud: PointCloud, metric: MetricKind) -> float:
    """``max_j d(p_0, p_j)``; twice this bounds the diameter from above."""
    a = metric.prepare(cloud.points)
    return float(np.max(metric.dist(a[0], a)))


def energy_mc(
    cloud: PointCloud,
    s: float,
    metric: MetricKind,
    pairs: int = 10**6,
    seed: int = 0,
    batch: int = 2**16,
) -> float:
    """Monte Carlo mean of ``d(p, q)^(-s)`` over random distinct index pairs.

    Pairs are drawn in fixed-size batches, batch ``k`` from
    ``SeedSequence([seed, k])``, so the value does not depend on how batches
    are scheduled.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    if pairs < 10**4:
        raise ValueError("need at least 10^4 pairs")
    N = len(cloud)
    if N < 2:
        raise ValueError("energy needs at least two points")
    a = metric.prepare(cloud.points)
    total = 0.0
    nb = math.ceil(pairs / batch)
    for k in range(nb):
        size = min(batch, pairs - k * batch)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), k])))
        i = rng.integers(0, N, size)
        j = (i + rng.integers(1, N, size)) % N
        total += float(np.sum(metric.dist(a[i], a[j]) ** (-s)))
    return total / pairs


def _auto_scales(cloud: PointCloud, metric: MetricKind):
    lo = 10 * cloud.resolution
    if metric.tag == "koranyi":
        # Korányi distance of Euclidean-close points is at most of order sqrt(dist)
        z = np.linalg.norm(cloud.points[:, :-1], axis=1).max()
        lo = max(lo, 2 * math.sqrt(lo * (1 + z / 2)))
    hi = max_dist_from_first(cloud, metric) / 2
    return lo, hi


def dimension_comparison_check(
    cloud: PointCloud,
    euclid_scales: tuple | None = None,
    heis_scales: tuple | None = None,
    levels: int = 8,
    slack: float = 0.15,
) -> dict:
    """Estimate both dimensions and test the comparison sandwich.

    ``max(dE, 2 dE - 2n) <= dH <= min(2 dE, dE + 1)`` with ``slack`` on
    each side.
    """
    e_metric, h_metric = MetricKind.euclidean(), MetricKind.koranyi()
    e_lo, e_hi = euclid_scales or _auto_scales(cloud, e_metric)
    h_lo, h_hi = heis_scales or _auto_scales(cloud, h_metric)
    est_e = estimate_dim(cloud, e_metric, e_lo, e_hi, levels)
    est_h = estimate_dim(cloud, h_metric, h_lo, h_hi, levels)
    dE, dH, n = est_e.slope, est_h.slope, cloud.n
    lower = max(dE, 2 * dE - 2 * n)
    upper = min(2 * dE, dE + 1)
    return {
        "label": cloud.label,
        "dim_euclidean": est_e.to_dict(),
        "dim_heisenberg": est_h.to_dict(),
        "lower": lower,
        "upper": upper,
        "slack": slack,
        "holds": bool(lower - slack <= dH <= upper + slack),
    }
