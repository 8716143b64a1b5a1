import numpy as np
import pytest

from deadoil.mesh import Grid2D
from deadoil.objective import CostParams
from deadoil.optimizer import OptimizerOptions, minimize
from deadoil.state import TimeGrid, solve_forward


@pytest.mark.parametrize("kw", [{"grad_tol": 0.0}, {"armijo_c": 1.0}, {"shrink": 1.0},
                                {"max_iter": -1}])
def test_options_validated(kw):
    with pytest.raises(ValueError):
        OptimizerOptions(**kw)


@pytest.fixture(scope="module")
def small(coef):
    g = Grid2D(9, 9)
    tg = TimeGrid(0.05, 80)
    s = g.sine_mode(1, 1)
    f_star = np.broadcast_to(5.0 * s, (tg.N,) + g.shape).copy()
    ref = solve_forward(g, 0.5 * s, s, f_star, coef, tg)
    return g, tg, 0.5 * s, s, CostParams(ref.u, ref.p, beta1=1e-2, q0=1.0)


def test_descent_and_histories(coef, small, tmp_path):
    g, tg, u0, p0, params = small
    # |g0| is far below 1 here, so the stopping test is effectively absolute
    opts = OptimizerOptions(grad_tol=1e-9, max_iter=200)
    res = minimize(g, u0, p0, np.zeros((tg.N,) + g.shape), params, coef, tg, opts)
    assert res.status == "converged"
    J = np.array(res.J_history)
    assert np.all(np.diff(J) <= 0)
    assert res.iterations > 0
    assert res.grad_norm_history[-1] <= 1e-9
    n = len(J)
    assert all(len(h) == n for h in (res.grad_norm_history, res.kkt_history,
                                     res.step_history, res.shrink_history))
    res.write_log(tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "iter,J,grad_norm,kkt_residual,step_size,shrinks"
    assert len(lines) == n + 1


def test_iteration_cap(coef, small):
    g, tg, u0, p0, params = small
    res = minimize(g, u0, p0, np.zeros((tg.N,) + g.shape), params, coef, tg,
                   OptimizerOptions(grad_tol=1e-14, max_iter=1, log_kkt=False))
    assert res.status == "iteration-cap" and res.iterations == 1
    assert np.isnan(res.kkt_history[0])


def test_stationary_start_stops_immediately(coef, small):
    g, tg, u0, p0, _ = small
    f = np.zeros((tg.N,) + g.shape)
    ref = solve_forward(g, u0, p0, f, coef, tg)
    res = minimize(g, u0, p0, f, CostParams(ref.u, ref.p), coef, tg)
    assert res.status == "converged" and res.iterations == 0
    np.testing.assert_array_equal(res.best_control, f)
