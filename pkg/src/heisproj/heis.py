"""Group law, dilations and Korányi metric on the Heisenberg group H^n.

Points are stored as real coordinates ``(x_1..x_n, y_1..y_n, t)``.  Every
operation accepts either a :class:`HeisPoint` or a float array whose last
axis has length ``2n + 1``; arrays broadcast, so the same functions serve
single points and whole clouds.  A :class:`HeisPoint` argument yields a
:class:`HeisPoint` result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "HeisPoint",
    "ambient_n",
    "symplectic_form",
    "symplectic_matrix",
    "group_mul",
    "group_inv",
    "identity",
    "dilate",
    "koranyi_norm",
    "koranyi_dist",
    "euclid_dist",
    "reflect",
]


class DimensionMismatchError(ValueError):
    """Raised when operands live in Heisenberg groups of different rank."""


@dataclass(frozen=True, eq=False)
class HeisPoint:
    """A point ``(z, t)`` of H^n with ``z`` in R^{2n}."""

    z: np.ndarray
    t: float

    def __post_init__(self):
        z = np.array(self.z, dtype=float).reshape(-1)
        if z.size == 0 or z.size % 2:
            raise DimensionMismatchError(f"z must have even positive length, got {z.size}")
        t = float(self.t)
        if not (np.all(np.isfinite(z)) and np.isfinite(t)):
            raise ValueError("HeisPoint coordinates must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return self.z.size // 2

    @property
    def coords(self) -> np.ndarray:
        return np.append(self.z, self.t)

    @classmethod
    def from_coords(cls, c) -> "HeisPoint":
        c = np.asarray(c, dtype=float)
        return cls(c[:-1], c[-1])

    def __eq__(self, other):
        if not isinstance(other, HeisPoint):
            return NotImplemented
        return self.n == other.n and self.t == other.t and np.array_equal(self.z, other.z)

    def __hash__(self):
        return hash((self.z.tobytes(), self.t))

    def __neg__(self):
        return HeisPoint(-self.z, -self.t)

    def __repr__(self):
        return f"HeisPoint(z={self.z.tolist()}, t={self.t!r})"


def _as_array(p):
    if isinstance(p, HeisPoint):
        return p.coords, True
    a = np.asarray(p, dtype=float)
    if a.ndim == 0 or a.shape[-1] < 3 or a.shape[-1] % 2 == 0:
        raise DimensionMismatchError(f"last axis must have length 2n+1, got shape {a.shape}")
    return a, False


def _wrap(a, as_point):
    return HeisPoint.from_coords(a) if as_point else a


def _check_same(a, b):
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(
            f"points live in H^{(a.shape[-1] - 1) // 2} and H^{(b.shape[-1] - 1) // 2}"
        )


def ambient_n(p) -> int:
    """Rank ``n`` of the Heisenberg group containing ``p``."""
    a, _ = _as_array(p)
    return (a.shape[-1] - 1) // 2


def identity(n: int) -> HeisPoint:
    if n < 1:
        raise ValueError("n must be >= 1")
    return HeisPoint(np.zeros(2 * n), 0.0)


def symplectic_matrix(n: int) -> np.ndarray:
    """Matrix ``J`` with ``omega(z, w) = z @ J @ w``."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def symplectic_form(z, w):
    """``omega(z, w) = sum_j x_j v_j - y_j u_j`` along the last axis."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if z.shape[-1] != w.shape[-1] or z.shape[-1] % 2:
        raise DimensionMismatchError(
            f"symplectic form needs equal even lengths, got {z.shape[-1]} and {w.shape[-1]}"
        )
    n = z.shape[-1] // 2
    out = np.sum(z[..., :n] * w[..., n:], axis=-1) - np.sum(z[..., n:] * w[..., :n], axis=-1)
    return float(out) if out.ndim == 0 else out


def group_mul(p, q):
    """``(z, t) * (w, s) = (z + w, t + s + omega(z, w) / 2)``."""
    a, pa = _as_array(p)
    b, pb = _as_array(q)
    _check_same(a, b)
    z, w = a[..., :-1], b[..., :-1]
    t = a[..., -1] + b[..., -1] + 0.5 * symplectic_form(z, w)
    out = np.concatenate([z + w, np.asarray(t)[..., None]], axis=-1)
    return _wrap(out, pa and pb)


def group_inv(p):
    a, pa = _as_array(p)
    return _wrap(-a, pa)


reflect = group_inv  # p -> -p coincides with the group inverse


def dilate(r, p):
    """Non-isotropic dilation ``(z, t) -> (r z, r^2 t)``.

    ``r`` is a scalar or an array broadcasting against the point shape
    (one factor per point).
    """
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0):
        raise ValueError(f"dilation factor must be positive, got {r}")
    a, pa = _as_array(p)
    r = r[..., None]
    out = a * r
    out[..., -1:] *= r
    return _wrap(out, pa)


def koranyi_norm(p):
    """Korányi gauge ``(|z|^4 + 16 t^2)^(1/4)``."""
    a, _ = _as_array(p)
    z2 = np.sum(a[..., :-1] ** 2, axis=-1)
    out = (z2 * z2 + 16.0 * a[..., -1] ** 2) ** 0.25
    return float(out) if out.ndim == 0 else out


def koranyi_dist(p, q):
    """Left-invariant Korányi distance ``||q^{-1} p||``."""
    a, _ = _as_array(p)
    b, _ = _as_array(q)
    _check_same(a, b)
    return koranyi_norm(group_mul(-b, a))


def euclid_dist(p, q):
    a, _ = _as_array(p)
    b, _ = _as_array(q)
    _check_same(a, b)
    out = np.sqrt(np.sum((a - b) ** 2, axis=-1))
    return float(out) if out.ndim == 0 else out
