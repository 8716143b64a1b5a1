import dataclasses

import numpy as np
import pytest

from deadoil.coefficients import (TABLE_COLUMNS, builtin_set, load_table, tabulated_set,
                                  verify_hypotheses)


@pytest.mark.parametrize("c1,c2", [(1.0, 2.0), (0.1, 5.0), (3.0, 3.5)])
def test_default_family_satisfies_hypotheses(c1, c2):
    rep = verify_hypotheses(builtin_set("default", c1, c2))
    assert rep.passed, str(rep)


def test_logistic_alias():
    a, b = builtin_set("default"), builtin_set("logistic")
    r = np.linspace(-3, 3, 11)
    np.testing.assert_array_equal(a.phi(r), b.phi(r))


@pytest.mark.parametrize("name,c1,c2", [("nope", 1, 2), ("default", 0.0, 2), ("default", 2, 1)])
def test_builtin_rejects(name, c1, c2):
    with pytest.raises(ValueError):
        builtin_set(name, c1, c2)


def test_planted_lower_bound_violation_is_flagged():
    coef = builtin_set()
    bad = dataclasses.replace(coef, d=lambda r: coef.d(r) - 0.5 * np.exp(-np.square(r)),
                              dd=lambda r: coef.dd(r) + r * np.exp(-np.square(r)))
    rep = verify_hypotheses(bad)
    assert not rep.passed
    check = rep["0 < c1 <= d(r)"]
    assert not check.passed
    assert check.worst_value < 1.0 and abs(check.worst_r) < 1.0
    assert rep["d' matches central difference"].passed


def test_wrong_derivative_is_flagged():
    coef = builtin_set()
    bad = dataclasses.replace(coef, dg=lambda r: 1.01 * coef.dg(r))
    rep = verify_hypotheses(bad)
    # g'' is differenced from the wrong g' as well
    assert {c.name for c in rep.failures()} == {"g' matches central difference",
                                               "g'' matches central difference"}


def _table(coef, r):
    return {c: getattr(coef, c)(r) for c in TABLE_COLUMNS if c != "r"}


def test_tabulated_reproduces_builtin(tmp_path):
    coef = builtin_set()
    r = np.linspace(-8, 8, 161)
    cols = _table(coef, r)
    tab = tabulated_set(r, **cols, c1=1.0, c2=2.0)
    s = np.linspace(-7.9, 7.9, 333)
    for name in ("phi", "dphi", "g", "dg", "d", "dd"):
        np.testing.assert_allclose(getattr(tab, name)(s), getattr(coef, name)(s), atol=1e-6)
    assert verify_hypotheses(tab, -8, 8, fd_rtol=1e-5)["phi' matches central difference"].passed

    path = tmp_path / "table.csv"
    np.savetxt(path, np.column_stack([r] + [cols[c] for c in TABLE_COLUMNS[1:]]),
               delimiter=",", header=",".join(TABLE_COLUMNS), comments="")
    loaded = load_table(path, 1.0, 2.0)
    np.testing.assert_allclose(loaded.d(s), tab.d(s), rtol=1e-15)


def test_tabulated_rejects_nonuniform():
    r = np.array([0.0, 1.0, 3.0])
    z = np.zeros(3)
    with pytest.raises(ValueError):
        tabulated_set(r, *([z] * 9), c1=1.0, c2=2.0)
