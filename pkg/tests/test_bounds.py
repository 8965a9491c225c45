import csv
import io
import math

import numpy as np
import pytest

from heisproj.bounds import (
    H1_COR_BREAK,
    KINDS,
    BoundCurve,
    _euclidean_composite,
    _left_best_composite,
    _quotient_composite,
    bound_euclidean_right,
    bound_h1_cor,
    bound_h1_left_best,
    bound_left_best,
    bound_quotient_right,
    conjecture_euclidean,
    conjecture_quotient,
    tabulate_csv,
)

# reference values, three per curve
SPOT_VALUES = [
    (lambda s: bound_euclidean_right(1, 1, s), 0.5, 0.5),
    (lambda s: bound_euclidean_right(1, 1, s), 2.0, 1.0),
    (lambda s: bound_euclidean_right(2, 1, s), 4.5, 3.5),
    (lambda s: bound_quotient_right(1, 1, s), 1.0, 0.5),
    (lambda s: bound_quotient_right(2, 1, s), 3.0, 2.0),
    (lambda s: bound_quotient_right(1, 1, s), 3.5, 1.5),
    (lambda s: bound_left_best(2, 1, s), 0.5, 0.5),
    (lambda s: bound_left_best(2, 1, s), 4.0, 3.0),
    (lambda s: bound_left_best(2, 1, s), 5.5, 4.0),
    (bound_h1_left_best, 3.0, 1.4),
    (bound_h1_left_best, 2.5, 1.25),
    (bound_h1_left_best, 4.0, 3.0),
    (lambda s: bound_h1_cor(s, "euclidean"), 1.5, 1.25),
    (lambda s: bound_h1_cor(s, "euclidean"), 2.0, 1.4),
    (lambda s: bound_h1_cor(s, "quotient"), 3.0, 1.4),
]

NM = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]


def all_curves():
    out = []
    for kind in KINDS:
        if kind.startswith("h1_"):
            out.append(BoundCurve(kind))
        else:
            out.extend(BoundCurve(kind, n, m) for n, m in NM)
    return out


@pytest.mark.parametrize("f,s,expected", SPOT_VALUES)
def test_spot_values(f, s, expected):
    assert f(s) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("c", all_curves(), ids=lambda c: c.label())
def test_continuity_at_breakpoints(c):
    lo, hi = c.domain
    for b in c.breakpoints:
        if lo < b < hi:
            left, right = c.one_sided(b)
            assert abs(left - right) <= 1e-12


@pytest.mark.parametrize("c", all_curves(), ids=lambda c: c.label())
def test_monotone_and_ceiling(c):
    s = np.linspace(*c.domain, 10**4)
    v = c(s)
    assert np.all(np.diff(v) >= -1e-12)
    assert np.all(v <= s + 1e-12)
    assert np.all(v >= -1e-12)


@pytest.mark.parametrize("n,m", NM)
def test_composite_forms_agree(n, m):
    s = np.linspace(0, 2 * n + 1, 2001)
    assert np.allclose(bound_euclidean_right(n, m, s), _euclidean_composite(n, m, s), atol=1e-14)
    s = np.linspace(0, 2 * n + 2, 2001)
    assert np.allclose(bound_quotient_right(n, m, s), _quotient_composite(n, m, s), atol=1e-14)
    assert np.allclose(bound_left_best(n, m, s), _left_best_composite(n, m, s), atol=1e-14)


def test_cor_curve_improves_on_interval():
    assert H1_COR_BREAK == pytest.approx(2.5 + math.sqrt(105) / 14)
    s = np.linspace(2.5, H1_COR_BREAK, 102)[1:-1]
    assert np.all(bound_h1_cor(s, "quotient") > bound_quotient_right(1, 1, s))
    # and the H^1 best curve uses it there
    assert np.allclose(bound_h1_left_best(s), bound_h1_cor(s, "quotient"))


def test_conjectures_flagged_and_above():
    for n, m in NM:
        c = BoundCurve("conjecture_euclidean", n, m)
        assert c.conjecture and not BoundCurve("euclidean_right", n, m).conjecture
        s = np.linspace(0, 2 * n + 1, 500)
        assert np.all(conjecture_euclidean(n, m, s) >= bound_euclidean_right(n, m, s) - 1e-12)
        s = np.linspace(0, 2 * n + 2, 500)
        assert np.all(conjecture_quotient(n, m, s) >= bound_quotient_right(n, m, s) - 1e-12)


def test_domain_and_argument_errors():
    with pytest.raises(ValueError):
        bound_euclidean_right(1, 1, 3.5)
    with pytest.raises(ValueError):
        bound_quotient_right(1, 2, 1.0)
    with pytest.raises(ValueError):
        bound_h1_cor(0.5, "euclidean")
    with pytest.raises(ValueError):
        bound_h1_cor(2.0, "other")
    with pytest.raises(ValueError):
        BoundCurve("h1_left_best", 2, 1)
    with pytest.raises(ValueError):
        BoundCurve("nope")


def test_tabulation():
    c = BoundCurve("quotient_right", 1, 1)
    rows = c.tabulate(0.01)
    assert len(rows) == 401 and rows[0][0] == 0.0 and rows[-1][0] == 4.0
    text = tabulate_csv([c, BoundCurve("conjecture_quotient")])
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == ["s", "value", "kind", "conjecture"]
    assert len(parsed) == 1 + 2 * 401
    assert {r[3] for r in parsed[1:402]} == {"false"} and {r[3] for r in parsed[402:]} == {"true"}
    assert isinstance(bound_quotient_right(1, 1, 1.0), float)
