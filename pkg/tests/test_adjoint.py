import numpy as np
import pytest

from conftest import smooth
from deadoil.adjoint import (NonConvergenceError, NonConvergenceWarning, aggregate_operator,
                             kkt_residual, linearized_step, linearized_step_T,
                             reduced_gradient, solve_adjoint_aggregate)
from deadoil.coefficients import CoefficientSet
from deadoil.mesh import Grid2D, inner
from deadoil.objective import CostParams, evaluate_cost
from deadoil.oracle import fd_directional, smooth_control
from deadoil.state import StateTrajectory, TimeGrid, solve_forward


def test_summation_by_parts_per_step(coef, grid16, rng):
    u, p = smooth(grid16, rng), smooth(grid16, rng)
    du, dp, df, lu, lp = (rng.standard_normal(grid16.shape) for _ in range(5))
    tau = 1e-4
    a, b = linearized_step(grid16, u, p, coef, tau, du, dp, df)
    mu, mp, mf = linearized_step_T(grid16, u, p, coef, tau, lu, lp)
    lhs = np.sum(a * lu) + np.sum(b * lp)
    rhs = np.sum(du * mu) + np.sum(dp * mp) + np.sum(df * mf)
    assert abs(lhs - rhs) <= 1e-13 * (abs(lhs) + np.abs(a * lu).sum())


def test_linearized_step_matches_difference(coef, grid16, rng):
    tg = TimeGrid(0.05, 256)
    from deadoil.state import step_forward
    u, p, f = (smooth(grid16, rng) for _ in range(3))
    du, dp, df = (smooth(grid16, rng) for _ in range(3))
    s = 1e-6
    up, pp = step_forward(grid16, u + s * du, p + s * dp, f + s * df, coef, tg)
    um, pm = step_forward(grid16, u - s * du, p - s * dp, f - s * df, coef, tg)
    a, b = linearized_step(grid16, u, p, coef, tg.tau, du, dp, df)
    np.testing.assert_allclose((up - um) / (2 * s), a, atol=1e-8)
    np.testing.assert_allclose((pp - pm) / (2 * s), b, atol=1e-8)


@pytest.mark.parametrize("q0", [1.0, 1.5, 2.0])
def test_gradient_small_instance(coef, rng, q0):
    g = Grid2D(7, 6)
    tg = TimeGrid(0.02, 20)
    u0, p0 = 0.5 * g.sine_mode(1, 1), g.sine_mode(2, 1)
    f = 2.0 + smooth_control(g, tg.N, rng)
    params = CostParams(0.1 * g.sine_mode(1, 2), g.zeros(), beta1=0.05, q0=q0)
    _, _, grad = reduced_gradient(g, u0, p0, f, params, coef, tg)

    def J(ff):
        return evaluate_cost(solve_forward(g, u0, p0, ff, coef, tg), ff, params, tg)

    for _ in range(3):
        d = smooth_control(g, tg.N, rng)
        assert fd_directional(J, f, d, 1e-5) == pytest.approx(inner(g, grad, d), rel=1e-7)


def test_uncontrolled_targets_give_zero_everything(coef, grid16):
    tg = TimeGrid(0.05, 256)
    u0, p0 = 0.5 * grid16.sine_mode(1, 1), grid16.sine_mode(1, 1)
    f = np.zeros((tg.N,) + grid16.shape)
    ref = solve_forward(grid16, u0, p0, f, coef, tg)
    params = CostParams(ref.u, ref.p, beta1=1e-2, q0=1.0)
    traj, adj, grad = reduced_gradient(grid16, u0, p0, f, params, coef, tg)
    assert evaluate_cost(traj, f, params, tg) == 0.0
    assert np.all(grad == 0) and np.all(adj.lam_u == 0) and np.all(adj.lam_p == 0)
    agg = solve_adjoint_aggregate(traj, params, coef, tg)
    assert np.all(agg.e1 == 0) and np.all(agg.p1 == 0)
    assert kkt_residual(grid16, f, agg, params, tg) == 0.0


def _const_coef(a, dconst):
    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    const = lambda c: (lambda r: np.full_like(np.asarray(r, dtype=float), c))
    return CoefficientSet(lambda r: a * np.asarray(r, dtype=float), const(a), zero, zero,
                          zero, zero, zero, const(dconst), zero, min(a, dconst),
                          max(a, dconst), 0.0, 0.0)


@pytest.mark.parametrize("kx,ky", [(1, 1), (2, 3), (4, 1)])
@pytest.mark.parametrize("a,dc", [(1.0, 2.0), (0.01, 0.003)])
def test_aggregate_single_mode_closed_form(kx, ky, a, dc):
    g = Grid2D(12, 10)
    tg = TimeGrid(1.0, 4)
    coef = _const_coef(a, dc)
    mode = g.sine_mode(kx, ky)
    zeros = np.zeros((tg.N + 1,) + g.shape)
    traj = StateTrajectory(g, zeros, zeros)
    # mismatch is -U = c * mode on every level, so tau * sum = T * c * mode
    params = CostParams(-2.0 * mode, -3.0 * mode)
    agg = solve_adjoint_aggregate(traj, params, coef, tg, tol=1e-13)
    lam = g.laplacian_eigenvalue(kx, ky)
    np.testing.assert_allclose(agg.e1, 2.0 * mode / (1 + a * lam), rtol=1e-8,
                               atol=1e-8 * abs(2.0 / (1 + a * lam)))
    np.testing.assert_allclose(agg.p1, 3.0 * mode / (1 + dc * lam), rtol=1e-8,
                               atol=1e-8 * abs(3.0 / (1 + dc * lam)))


def test_aggregate_zero_rhs(coef, desk):
    traj = solve_forward(desk.grid, desk.u0, desk.p0, desk.f_star, coef, desk.tg)
    agg = solve_adjoint_aggregate(traj, desk.params, coef, desk.tg)
    assert agg.iterations == 0 and np.all(agg.e1 == 0) and np.all(agg.p1 == 0)


def _indefinite_case(coef):
    # on a large domain the smoothest modes have 1 + a lambda > 0, the roughest < 0
    g = Grid2D(17, 17, 20.0, 20.0)
    tg = TimeGrid(0.05, 4)
    s = g.sine_mode(1, 1)
    traj = solve_forward(g, 0.5 * s, s, np.zeros((tg.N,) + g.shape), coef, tg)
    return traj, CostParams(g.zeros(), g.zeros()), tg


def test_aggregate_operator_is_indefinite(coef):
    traj, _, _ = _indefinite_case(coef)
    g = traj.grid
    op = aggregate_operator(g, traj.u[-1], traj.p[-1], coef)
    M = np.column_stack([op.matvec(e) for e in np.eye(op.size)])
    ev = np.linalg.eigvals(M).real
    assert ev.min() < 0 < ev.max()


def test_non_convergence_raises_when_strict(coef):
    traj, params, tg = _indefinite_case(coef)
    with pytest.raises(NonConvergenceError) as info:
        solve_adjoint_aggregate(traj, params, coef, tg, max_iter=1)
    assert not info.value.result.converged


def test_non_convergence_warns_when_lenient(coef, caplog):
    traj, params, tg = _indefinite_case(coef)
    with pytest.warns(NonConvergenceWarning, match="not solved"):
        agg = solve_adjoint_aggregate(traj, params, coef, tg, max_iter=3, strict=False)
    assert not agg.converged and agg.iterations == 3
    assert "not solved" in caplog.text


def test_full_gmres_converges_on_indefinite_case(coef):
    traj, params, tg = _indefinite_case(coef)
    agg = solve_adjoint_aggregate(traj, params, coef, tg, tol=1e-9)
    assert agg.converged
