"""Piecewise lower bounds for projected dimension.

Each curve maps the dimension ``s`` of a set to the almost-sure lower bound
for the dimension of its vertical projection.  Curves are closed-interval
piecewise polynomials or rationals, continuous at every breakpoint.
Conjectured curves are available but always carry ``conjecture=True``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundCurve",
    "KINDS",
    "H1_COR_BREAK",
    "bound_euclidean_right",
    "bound_quotient_right",
    "bound_left_coset",
    "bound_left_best",
    "bound_h1_left_best",
    "bound_h1_cor",
    "conjecture_euclidean",
    "conjecture_quotient",
    "curve",
    "tabulate_csv",
]

# upper end of the range where the improved H^1 curve beats the general one
H1_COR_BREAK = 2.5 + math.sqrt(105) / 14
_EDGE = 1e-12


def _check_nm(n, m):
    if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer)) and 1 <= m <= n):
        raise ValueError(f"need integers 1 <= m <= n, got n={n}, m={m}")


def _domain(s, lo, hi):
    a = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < lo - _EDGE) or np.any(a > hi + _EDGE):
        raise ValueError(f"s outside the domain [{lo}, {hi}]")
    return a


def _out(a, vals):
    return float(vals) if a.ndim == 0 else vals


def _pieces(s, edges, funcs, lo, hi):
    a = _domain(s, lo, hi)
    conds = [a <= e for e in edges] + [np.ones_like(a, dtype=bool)]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.select(conds, [f(a) for f in funcs])
    return _out(a, vals)


def bound_euclidean_right(n: int, m: int, s):
    """Euclidean dimension bound for right-coset projections, ``s`` in [0, 2n+1]."""
    _check_nm(n, m)
    k = 2 * n - m
    return _pieces(
        s,
        [k, 2 * n],
        [lambda x: x, lambda x: np.full_like(x, k), lambda x: x - m],
        0,
        2 * n + 1,
    )


def bound_quotient_right(n: int, m: int, s):
    """Quotient-metric bound from the Heisenberg dimension, ``s`` in [0, 2n+2]."""
    _check_nm(n, m)
    k = 2 * n - m
    return _pieces(
        s,
        [2, k + 1, 2 * n + 1],
        [lambda x: x / 2, lambda x: x - 1, lambda x: np.full_like(x, k), lambda x: x - m - 1],
        0,
        2 * n + 2,
    )


def bound_left_coset(n: int, m: int, s):
    """Heisenberg bound for left-coset projections; same formula as the quotient one."""
    return bound_quotient_right(n, m, s)


def bound_left_best(n: int, m: int, s):
    """Best known a.e. bound for left-coset projections in H^n."""
    _check_nm(n, m)
    k = 2 * n - m
    return _pieces(
        s,
        [1, 2, k + 1, 2 * n + 1],
        [
            lambda x: x,
            lambda x: np.ones_like(x),
            lambda x: x - 1,
            lambda x: np.full_like(x, k),
            lambda x: 2 * (x - n - 1) - m,
        ],
        0,
        2 * n + 2,
    )


def bound_h1_left_best(s):
    """Best known a.e. bound for left-coset projections in H^1, ``s`` in [0, 4]."""
    return _pieces(
        s,
        [1, 2, 2.5, H1_COR_BREAK],
        [
            lambda x: x,
            lambda x: np.ones_like(x),
            lambda x: x / 2,
            lambda x: (x * x + x - 5) / (4 * x - 7),
            lambda x: 2 * x - 5,
        ],
        0,
        4,
    )


def bound_h1_cor(s, flavor: str):
    """Improved H^1 bounds: Euclidean on [1, 3], quotient on [2, 4]."""
    if flavor == "euclidean":
        return _pieces(
            s,
            [1.5],
            [lambda x: (1 + x) / 2, lambda x: (x * x + 3 * x - 3) / (4 * x - 3)],
            1,
            3,
        )
    if flavor == "quotient":
        return _pieces(
            s,
            [2.5],
            [lambda x: x / 2, lambda x: (x * x + x - 5) / (4 * x - 7)],
            2,
            4,
        )
    raise ValueError(f"flavor must be 'euclidean' or 'quotient', got {flavor!r}")


def conjecture_euclidean(n: int, m: int, s):
    """Conjectured Euclidean curve: ``min(s, 2n - m + 1)`` on [0, 2n+1]."""
    _check_nm(n, m)
    k = 2 * n - m + 1
    return _pieces(s, [k], [lambda x: x, lambda x: np.full_like(x, k)], 0, 2 * n + 1)


def conjecture_quotient(n: int, m: int, s):
    """Conjectured quotient curve: ``s/2``, then ``s - 1`` up to ``2n + 2 - m``, then flat."""
    _check_nm(n, m)
    k = 2 * n + 2 - m
    return _pieces(
        s,
        [2, k],
        [lambda x: x / 2, lambda x: x - 1, lambda x: np.full_like(x, k - 1)],
        0,
        2 * n + 2,
    )


# composite forms, kept as an independent cross-check of the piecewise ones


def _euclidean_composite(n, m, s):
    s = np.asarray(s, dtype=float)
    return np.maximum(np.minimum(s, 2 * n - m), s - m)


def _quotient_composite(n, m, s):
    s = np.asarray(s, dtype=float)
    return np.maximum(np.minimum(np.maximum(s / 2, s - 1), 2 * n - m), s - m - 1)


def _left_best_composite(n, m, s):
    s = np.asarray(s, dtype=float)
    old = np.maximum.reduce(
        [np.minimum(s, 1.0), (s - m) / 2, s - m - 1, 2 * (s - n - 1) - m]
    )
    return np.maximum(old, _quotient_composite(n, m, s))


KINDS = (
    "euclidean_right",
    "quotient_right",
    "left_coset_heis",
    "h1_left_best",
    "h1_euclidean_cor",
    "h1_quotient_cor",
    "conjecture_euclidean",
    "conjecture_quotient",
)


@dataclass(frozen=True)
class BoundCurve:
    """A named bound curve with its domain and breakpoints."""

    kind: str
    n: int = 1
    m: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        _check_nm(self.n, self.m)
        if self.kind.startswith("h1_") and (self.n, self.m) != (1, 1):
            raise ValueError(f"{self.kind} is defined for n = m = 1 only")

    @property
    def conjecture(self) -> bool:
        return self.kind.startswith("conjecture")

    @property
    def domain(self) -> tuple:
        n = self.n
        return {
            "euclidean_right": (0.0, 2 * n + 1.0),
            "quotient_right": (0.0, 2 * n + 2.0),
            "left_coset_heis": (0.0, 2 * n + 2.0),
            "h1_left_best": (0.0, 4.0),
            "h1_euclidean_cor": (1.0, 3.0),
            "h1_quotient_cor": (2.0, 4.0),
            "conjecture_euclidean": (0.0, 2 * n + 1.0),
            "conjecture_quotient": (0.0, 2 * n + 2.0),
        }[self.kind]

    @property
    def breakpoints(self) -> tuple:
        n, m = self.n, self.m
        k = 2 * n - m
        return {
            "euclidean_right": (k, 2 * n),
            "quotient_right": (2, k + 1, 2 * n + 1),
            "left_coset_heis": (1, 2, k + 1, 2 * n + 1),
            "h1_left_best": (1, 2, 2.5, H1_COR_BREAK),
            "h1_euclidean_cor": (1.5,),
            "h1_quotient_cor": (2.5,),
            "conjecture_euclidean": (k + 1,),
            "conjecture_quotient": (2, k + 2),
        }[self.kind]

    def __call__(self, s):
        n, m = self.n, self.m
        k = self.kind
        if k == "euclidean_right":
            return bound_euclidean_right(n, m, s)
        if k == "quotient_right":
            return bound_quotient_right(n, m, s)
        if k == "left_coset_heis":
            return bound_left_best(n, m, s)
        if k == "h1_left_best":
            return bound_h1_left_best(s)
        if k == "h1_euclidean_cor":
            return bound_h1_cor(s, "euclidean")
        if k == "h1_quotient_cor":
            return bound_h1_cor(s, "quotient")
        if k == "conjecture_euclidean":
            return conjecture_euclidean(n, m, s)
        return conjecture_quotient(n, m, s)

    def one_sided(self, s: float, eps: float = 1e-13) -> tuple:
        """Values of the two adjacent pieces at a breakpoint ``s``."""
        lo, hi = self.domain
        left = self(max(lo, s - eps))
        right = self(min(hi, s + eps))
        return left, right

    def tabulate(self, step: float = 0.01) -> list:
        lo, hi = self.domain
        num = int(round((hi - lo) / step)) + 1
        s = np.linspace(lo, hi, num)
        vals = np.atleast_1d(self(s))
        return [(float(x), float(v), self.kind, self.conjecture) for x, v in zip(s, vals)]

    def label(self) -> str:
        return self.kind if self.kind.startswith("h1_") else f"{self.kind}(n={self.n},m={self.m})"


def curve(kind: str, n: int = 1, m: int = 1) -> BoundCurve:
    return BoundCurve(kind, n, m)


def tabulate_csv(curves, step: float = 0.01) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "value", "kind", "conjecture"])
    for c in curves:
        for s, v, _, conj in c.tabulate(step):
            w.writerow([repr(s), repr(v), c.label(), "true" if conj else "false"])
    return buf.getvalue()
