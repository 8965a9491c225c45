"""Isotropic planes, Haar sampling on U(n) and the four projection maps.

A plane ``V`` in ``G_h(n, m)`` is an m-dimensional subspace of R^{2n} on
which the symplectic form vanishes.  Its vertical complement is
``V^perp x R``.  Samples are drawn as ``V = R V_0`` with ``R`` Haar on U(n)
embedded in O(2n) as ``[[A, -B], [B, A]]`` and ``V_0 = span(e_1..e_m)``.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence``; a sampler seeded with ``s`` always yields the same plane
sequence, and parallel tasks use ``SeedSequence([s, task_index])``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .heis import (
    DimensionMismatchError,
    HeisPoint,
    _as_array,
    _wrap,
    group_inv,
    group_mul,
    symplectic_form,
    symplectic_matrix,
)

__all__ = [
    "IsotropicPlane",
    "PlaneSampler",
    "canonical_plane",
    "haar_unitary",
    "unitary_to_orthogonal",
    "sample_plane",
    "plane_from_angle",
    "proj_subspace",
    "proj_horizontal",
    "proj_right_coset",
    "proj_left_coset",
    "proj_right_coset_via_group",
]

TOL = 1e-10


@dataclass(frozen=True, eq=False)
class IsotropicPlane:
    """Isotropic m-plane of R^{2n} given by an orthonormal basis (rows)."""

    n: int
    m: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float, ndmin=2)
        if not (1 <= self.m <= self.n):
            raise ValueError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")
        if b.shape != (self.m, 2 * self.n):
            raise DimensionMismatchError(f"basis shape {b.shape} != {(self.m, 2 * self.n)}")
        gram = b @ b.T
        if np.max(np.abs(gram - np.eye(self.m))) > TOL:
            raise ValueError("basis is not orthonormal")
        omega = b @ symplectic_matrix(self.n) @ b.T
        if np.max(np.abs(omega)) > TOL:
            raise ValueError("plane is not isotropic")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def projector(self) -> np.ndarray:
        """Orthogonal projector onto V as a (2n, 2n) matrix."""
        return self.basis.T @ self.basis

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "m": self.m, "basis": self.basis.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "IsotropicPlane":
        d = json.loads(text)
        return cls(int(d["n"]), int(d["m"]), np.array(d["basis"], dtype=float))

    def __eq__(self, other):
        if not isinstance(other, IsotropicPlane):
            return NotImplemented
        return self.n == other.n and self.m == other.m and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash((self.n, self.m, self.basis.tobytes()))


def canonical_plane(n: int, m: int) -> IsotropicPlane:
    """``V_0 = span(e_1, ..., e_m)`` (the first m x-coordinates)."""
    return IsotropicPlane(n, m, np.eye(2 * n)[:m])


def plane_from_angle(theta: float) -> IsotropicPlane:
    """The line ``V_theta`` spanned by ``(cos theta, sin theta)`` in H^1."""
    return IsotropicPlane(1, 1, np.array([[np.cos(theta), np.sin(theta)]]))


def haar_unitary(rng: np.random.Generator, n: int, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary matrices via QR of a complex Ginibre matrix.

    The R-factor diagonal is rotated to unit-modulus phases so the law is
    exactly Haar rather than QR-convention dependent.
    """
    shape = (n, n) if size is None else (size, n, n)
    g = rng.standard_normal(shape + (2,))
    z = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def unitary_to_orthogonal(u: np.ndarray) -> np.ndarray:
    """Real (2n, 2n) form ``[[A, -B], [B, A]]`` of ``u = A + iB``."""
    a, b = u.real, u.imag
    top = np.concatenate([a, -b], axis=-1)
    bot = np.concatenate([b, a], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def _plane_from_unitary(u: np.ndarray, m: int) -> IsotropicPlane:
    n = u.shape[-1]
    cols = unitary_to_orthogonal(u)[:, :m]
    q, r = np.linalg.qr(cols)
    q = q * np.sign(np.diagonal(r))
    return IsotropicPlane(n, m, q.T)


class PlaneSampler:
    """Reproducible stream of Haar-random planes in ``G_h(n, m)``."""

    def __init__(self, n: int, m: int, seed: int):
        if not (1 <= m <= n):
            raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
        self.n, self.m, self.seed = n, m, int(seed)
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    @classmethod
    def for_task(cls, n: int, m: int, seed: int, task: int) -> "PlaneSampler":
        s = cls(n, m, seed)
        s.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(task)])))
        return s

    def sample(self) -> IsotropicPlane:
        return _plane_from_unitary(haar_unitary(self.rng, self.n), self.m)

    def sample_many(self, k: int) -> list[IsotropicPlane]:
        # same bit stream as k calls to sample(): normals are drawn plane by plane
        us = haar_unitary(self.rng, self.n, size=k)
        return [_plane_from_unitary(u, self.m) for u in us]

    def sample_bases(self, k: int) -> np.ndarray:
        """Raw orthonormal bases, shape (k, m, 2n), without per-plane validation."""
        us = haar_unitary(self.rng, self.n, size=k)
        cols = unitary_to_orthogonal(us)[..., :, : self.m]
        q, r = np.linalg.qr(cols)
        q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
        return np.swapaxes(q, -1, -2)


def sample_plane(sampler: PlaneSampler) -> IsotropicPlane:
    return sampler.sample()


def _check_plane(V: IsotropicPlane, length: int):
    if length != 2 * V.n:
        raise DimensionMismatchError(f"vector of length {length} does not match R^{2 * V.n}")


def proj_subspace(V: IsotropicPlane, z, which: str = "V") -> np.ndarray:
    """Euclidean orthogonal projection of ``z`` onto ``V`` or ``V^perp``."""
    z = np.asarray(z, dtype=float)
    _check_plane(V, z.shape[-1])
    pv = (z @ V.basis.T) @ V.basis
    if which == "V":
        return pv
    if which == "V_perp":
        return z - pv
    raise ValueError(f"which must be 'V' or 'V_perp', got {which!r}")


def proj_horizontal(V: IsotropicPlane, p):
    """``P_V(z, t) = (pi_V z, 0)``."""
    a, ap = _as_array(p)
    _check_plane(V, a.shape[-1] - 1)
    out = np.zeros_like(a)
    out[..., :-1] = proj_subspace(V, a[..., :-1], "V")
    return _wrap(out, ap)


def proj_right_coset(V: IsotropicPlane, p):
    """Right-coset projection onto ``V^perp x R``.

    ``(z, t) -> (pi_perp z, t - omega(pi_V z, pi_perp z) / 2)``.
    """
    a, ap = _as_array(p)
    _check_plane(V, a.shape[-1] - 1)
    z = a[..., :-1]
    zv = proj_subspace(V, z, "V")
    zp = z - zv
    out = np.empty_like(a)
    out[..., :-1] = zp
    out[..., -1] = a[..., -1] - 0.5 * symplectic_form(zv, zp)
    return _wrap(out, ap)


def proj_left_coset(V: IsotropicPlane, p):
    """Left-coset projection, ``P^L(p) = -P^R(-p)``."""
    a, ap = _as_array(p)
    return _wrap(-proj_right_coset(V, -a), ap)


def proj_right_coset_via_group(V: IsotropicPlane, p):
    """``P_V(p)^{-1} * p`` evaluated through the group law (cross-check)."""
    return group_mul(group_inv(proj_horizontal(V, p)), p)
