"""Quotient metric on ``V^perp x R``, the Grushin distance and path tools.

Quotient distance
-----------------
For ``p, q`` in ``V^perp x R`` the right-coset quotient distance (Korányi
form) is ``min_{w in V} d_H((w, 0) * p, q)``.  Writing ``w = sum a_i b_i``
the fourth power of the objective is

    (|a|^2 + |z_p - z_q|^2)^2 + 16 (c + a . g / 2)^2,
    c = t_p - t_q + omega(z_p, z_q) / 2,   g_i = omega(b_i, z_p + z_q),

which depends on ``a`` only through ``|a|`` and ``a . g``.  Any component of
``a`` orthogonal to ``g`` raises the first term and leaves the second
unchanged, so the minimiser lies on the line ``a = lam * g / |g|`` and the
m-dimensional search collapses to the scalar problem

    F(lam) = (lam^2 + D)^2 + 16 (c + h lam)^2,   D = |dz|^2,  h = |g| / 2.

``F'`` is a cubic with positive leading coefficient and non-negative linear
coefficient, hence a single real root, so ``F`` is unimodal.  It is
minimised by a coarse uniform grid on ``[-R, R]`` followed by golden-section
refinement, all vectorised over many pairs at once.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .grassmann import IsotropicPlane, proj_right_coset
from .heis import HeisPoint, _as_array, koranyi_dist, symplectic_form

__all__ = [
    "QuotientMetricOptions",
    "NotInVerticalSubgroupError",
    "GrushinPoint",
    "PlanarPath",
    "HeisPath",
    "quotient_dist",
    "quotient_objective",
    "grushin_dist",
    "grushin_length",
    "heis_horizontal_length",
    "horizontality_defect",
    "grushin_lift",
    "write_path_csv",
    "read_path_csv",
]

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0
MEMBERSHIP_TOL = 1e-9


class NotInVerticalSubgroupError(ValueError):
    """A point handed to the quotient metric is not in ``V^perp x R``."""


@dataclass(frozen=True)
class QuotientMetricOptions:
    coarse_grid_points_per_axis: int = 17
    refine_iters: int = 48
    radius_slack: float = 1.0

    def __post_init__(self):
        if self.coarse_grid_points_per_axis < 9:
            raise ValueError("coarse_grid_points_per_axis must be >= 9")
        if self.refine_iters < 40:
            raise ValueError("refine_iters must be >= 40")
        if not self.radius_slack >= 1.0:
            raise ValueError("radius_slack must be >= 1")


DEFAULT_OPTIONS = QuotientMetricOptions()


def _reduced_terms(V: IsotropicPlane, a: np.ndarray, b: np.ndarray):
    zp, zq = a[..., :-1], b[..., :-1]
    for z in (zp, zq):
        leak = np.linalg.norm(z @ V.basis.T, axis=-1)
        if np.any(leak > MEMBERSHIP_TOL * (1.0 + np.linalg.norm(z, axis=-1))):
            raise NotInVerticalSubgroupError(
                "quotient_dist needs points of V^perp x R; apply proj_right_coset first"
            )
    dz = zp - zq
    D = np.sum(dz * dz, axis=-1)
    s = zp + zq
    g = symplectic_form(V.basis, s[..., None, :])
    h = 0.5 * np.sqrt(np.sum(g * g, axis=-1))
    c = a[..., -1] - b[..., -1] + 0.5 * symplectic_form(zp, zq)
    return D, h, np.asarray(c, dtype=float)


def quotient_objective(lam, D, h, c):
    """Fourth power of the Korányi objective along the optimal line."""
    u = lam * lam + D
    v = c + h * lam
    return u * u + 16.0 * v * v


def _minimise(D, h, c, radius, opts: QuotientMetricOptions):
    D, h, c, radius = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (D, h, c, radius)))
    K = opts.coarse_grid_points_per_axis
    frac = np.linspace(-1.0, 1.0, K)
    grid = frac[:, None] * radius.reshape(1, -1)
    Df, hf, cf = D.reshape(1, -1), h.reshape(1, -1), c.reshape(1, -1)
    vals = quotient_objective(grid, Df, hf, cf)
    best = np.argmin(vals, axis=0)
    cols = np.arange(vals.shape[1])
    fbest = np.minimum(vals[best, cols], quotient_objective(0.0, Df[0], hf[0], cf[0]))
    step = 2.0 * radius.reshape(-1) / (K - 1)
    center = grid[best, cols]
    lo = np.maximum(center - step, -radius.reshape(-1))
    hi = np.minimum(center + step, radius.reshape(-1))

    F = lambda x: quotient_objective(x, Df[0], hf[0], cf[0])  # noqa: E731
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = F(x1), F(x2)
    for _ in range(opts.refine_iters):
        left = f1 < f2
        lo, hi = np.where(left, lo, x1), np.where(left, x2, hi)
        # one fresh evaluation per column; the other interior point is reused
        xe = np.where(left, hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
        fe = F(xe)
        x1, x2 = np.where(left, xe, x2), np.where(left, x1, xe)
        f1, f2 = np.where(left, fe, f2), np.where(left, f1, fe)
    fmid = F(0.5 * (lo + hi))
    fmin = np.minimum(np.minimum(fbest, fmid), np.minimum(f1, f2))
    return np.maximum(fmin, 0.0).reshape(D.shape) ** 0.25


def quotient_dist(V: IsotropicPlane, p, q, opts: QuotientMetricOptions | None = None):
    """Right-coset quotient distance between points of ``V^perp x R``.

    Broadcasts over arrays of points.  Raises
    :class:`NotInVerticalSubgroupError` if an input has a component in ``V``.
    The result never exceeds ``koranyi_dist(p, q)`` because ``w = 0`` is on
    the search grid.
    """
    opts = opts or DEFAULT_OPTIONS
    a, ap = _as_array(p)
    b, bp = _as_array(q)
    if a.shape[-1] != 2 * V.n + 1 or b.shape[-1] != 2 * V.n + 1:
        raise ValueError("points do not match the ambient dimension of the plane")
    a, b = np.broadcast_arrays(a, b)
    D, h, c = _reduced_terms(V, a, b)
    radius = opts.radius_slack * (np.sqrt(D) + koranyi_dist(a, b))
    D, h, c, radius = np.broadcast_arrays(D, h, c, radius)
    # forward and backward (c -> -c) problems solved in one vectorised pass
    both = _minimise(*(np.stack([x, y]) for x, y in ((D, D), (h, h), (c, -c), (radius, radius))), opts)
    out = np.minimum(both[0], both[1])
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- Grushin


@dataclass(frozen=True)
class GrushinPoint:
    v: float
    tau: float

    def __post_init__(self):
        if not (np.isfinite(self.v) and np.isfinite(self.tau)):
            raise ValueError("GrushinPoint coordinates must be finite")

    def as_array(self):
        return np.array([self.v, self.tau])


def _planar(a):
    if isinstance(a, GrushinPoint):
        return a.as_array()
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError(f"Grushin points need 2 coordinates, got shape {a.shape}")
    return a


def grushin_dist(a, b):
    """Comparable Grushin distance

    ``max(|dv|, min(|dtau|^(1/2), |dtau| / max(|v_a|, |v_b|)))``,
    with ``|dtau| / 0`` read as ``+inf``.
    """
    x, y = _planar(a), _planar(b)
    dv = np.abs(x[..., 0] - y[..., 0])
    dt = np.abs(x[..., 1] - y[..., 1])
    vmax = np.maximum(np.abs(x[..., 0]), np.abs(y[..., 0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(vmax > 0, dt / np.where(vmax > 0, vmax, 1.0), np.inf)
    ratio = np.where(dt == 0, 0.0, ratio)
    out = np.maximum(dv, np.minimum(np.sqrt(dt), ratio))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PlanarPath:
    """Samples ``(v(s), tau(s))`` on a uniform grid of ``[0, 1]``."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 2:
            raise ValueError("PlanarPath needs an (N >= 2, 2) array")
        if not np.all(np.isfinite(s)):
            raise ValueError("PlanarPath samples must be finite")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, f, num: int = 1001) -> "PlanarPath":
        s = np.linspace(0.0, 1.0, num)
        v, tau = f(s)
        return cls(np.column_stack([np.broadcast_to(v, s.shape), np.broadcast_to(tau, s.shape)]))

    def dilate(self, r: float) -> "PlanarPath":
        return PlanarPath(self.samples * np.array([r, r * r]))


@dataclass(frozen=True, eq=False)
class HeisPath:
    """Samples of a path in H^n on a uniform grid of ``[0, 1]``."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] < 3 or s.shape[1] % 2 == 0:
            raise ValueError("HeisPath needs an (N >= 2, 2n+1) array")
        object.__setattr__(self, "samples", s)

    def dilate(self, r: float) -> "HeisPath":
        scale = np.full(self.samples.shape[1], r)
        scale[-1] = r * r
        return HeisPath(self.samples * scale)

    def points(self) -> list[HeisPoint]:
        return [HeisPoint.from_coords(c) for c in self.samples]


def _grushin_steps(path: PlanarPath):
    v, tau = path.samples[:, 0], path.samples[:, 1]
    dv, dtau = np.diff(v), np.diff(tau)
    vbar = 0.5 * (v[1:] + v[:-1])
    moving = dtau != 0
    interior_zero = np.abs(v[1:-1]) < 1e-12
    touches = interior_zero & (moving[1:] | moving[:-1])
    crossing = moving & ((v[1:] * v[:-1] < 0) | (np.abs(vbar) < 1e-12))
    if np.any(touches) or np.any(crossing):
        raise ValueError("path meets the singular line v = 0 with non-zero tau velocity")
    with np.errstate(divide="ignore", invalid="ignore"):
        du = np.where(moving, -dtau / np.where(moving, vbar, 1.0), 0.0)
    return dv, du


def grushin_length(path: PlanarPath) -> float:
    """Grushin length of a sampled path.

    Each step contributes ``sqrt(dv^2 + (dtau / vbar)^2)`` with ``vbar`` the
    step midpoint, the same rule :func:`grushin_lift` integrates with, so a
    path and its lift have equal lengths to roundoff.
    """
    dv, du = _grushin_steps(path)
    return float(np.sum(np.hypot(dv, du)))


def horizontality_defect(path: HeisPath) -> float:
    """Mean over steps of ``|t' - omega(z, z') / 2|`` on the sample grid."""
    a = path.samples
    steps = a.shape[0] - 1
    z = a[:, :-1]
    dz = np.diff(z, axis=0)
    zbar = 0.5 * (z[1:] + z[:-1])
    dt = np.diff(a[:, -1])
    return float(np.mean(np.abs(dt - 0.5 * symplectic_form(zbar, dz)))) * steps


def heis_horizontal_length(path: HeisPath, tol: float = 1e-6) -> float:
    """Horizontal length ``sum |dz|`` of a horizontal path in H^n."""
    defect = horizontality_defect(path)
    if defect > tol:
        raise ValueError(f"path is not horizontal (mean defect {defect:.3g} > {tol:g})")
    return float(np.sum(np.linalg.norm(np.diff(path.samples[:, :-1], axis=0), axis=1)))


def grushin_lift(path: PlanarPath) -> HeisPath:
    """Horizontal lift to H^1 of a Grushin path.

    ``u(s) = -int tau'/v`` and the lift is ``(u, v, tau + u v / 2)``, which
    the right-coset projection along ``V_0`` maps back onto the input path.
    """
    _, du = _grushin_steps(path)
    u = np.concatenate([[0.0], np.cumsum(du)])
    v, tau = path.samples[:, 0], path.samples[:, 1]
    return HeisPath(np.column_stack([u, v, tau + 0.5 * u * v]))


def project_to_grushin(path: HeisPath) -> PlanarPath:
    """``(x, y, t) -> (y, t - x y / 2)``, the V_0 quotient chart of H^1."""
    from .grassmann import canonical_plane

    pr = proj_right_coset(canonical_plane(1, 1), path.samples)
    return PlanarPath(pr[:, 1:])


def write_path_csv(path, fh) -> None:
    """One row per sample: ``s`` then the coordinates."""
    s = path.samples
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["s"] + [f"c{i}" for i in range(s.shape[1])])
    for si, row in zip(np.linspace(0.0, 1.0, s.shape[0]), s):
        w.writerow([repr(float(si))] + [repr(float(x)) for x in row])


def read_path_csv(fh):
    rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return PlanarPath(data) if data.shape[1] == 2 else HeisPath(data)
