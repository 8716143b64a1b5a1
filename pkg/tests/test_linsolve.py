import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deadoil.linsolve import LinearOperator, solve_linear


def _dense(M, shapes):
    op = LinearOperator(lambda *b: None, shapes)
    def apply(*blocks):
        return op.unflatten(M @ op.flatten(blocks))
    return LinearOperator(apply, shapes)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 30))
@settings(max_examples=40, deadline=None)
def test_matches_dense_solve(seed, n):
    r = np.random.default_rng(seed)
    M = np.eye(n) * n + r.standard_normal((n, n))
    b = r.standard_normal(n)
    res = solve_linear(_dense(M, ((n,),)), (b,), tol=1e-12)
    assert res.converged
    np.testing.assert_allclose(res.x[0], np.linalg.solve(M, b), rtol=1e-8, atol=1e-10)


def test_block_operator_round_trip():
    shapes = ((2, 3), (4,))
    op = LinearOperator(lambda a, b: (2 * a, -b), shapes)
    assert op.size == 10
    res = solve_linear(op, (np.ones((2, 3)), np.arange(4.0)))
    np.testing.assert_allclose(res.x[0], 0.5)
    np.testing.assert_allclose(res.x[1], -np.arange(4.0))


def test_zero_rhs():
    op = LinearOperator(lambda a: 3 * a, ((5,),))
    res = solve_linear(op, (np.zeros(5),))
    assert res.converged and res.iterations == 0 and np.all(res.x[0] == 0)


def test_iteration_cap_reported():
    n = 40
    M = np.diag(np.linspace(-1, 1, n) + 1e-3)
    res = solve_linear(_dense(M, ((n,),)), (np.ones(n),), tol=1e-12, max_iter=3)
    assert not res.converged and res.iterations == 3 and res.residual > 1e-12


def test_history_is_nonincreasing():
    r = np.random.default_rng(1)
    M = np.eye(20) + 0.3 * r.standard_normal((20, 20))
    res = solve_linear(_dense(M, ((20,),)), (r.standard_normal(20),))
    assert np.all(np.diff(res.history) <= 1e-12)


def test_non_finite_operator():
    op = LinearOperator(lambda a: a * np.inf, ((3,),))
    with pytest.raises(FloatingPointError), np.errstate(invalid="ignore"):
        solve_linear(op, (np.ones(3),))
