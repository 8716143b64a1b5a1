"""Control gradients: the exact discrete adjoint and the aggregate system.

Two backends live here.

``solve_adjoint_discrete`` transposes the linearized explicit step, stencil
by stencil, and sweeps backward in time. The resulting gradient is exact
for the discrete cost composed with the discrete forward map.

``solve_adjoint_aggregate`` solves the stationary coupled system for the pair
``(e1, p1)``: the time-collapsed first-order optimality conditions with the
state coefficients frozen at one level, and ``kkt_residual`` measures the control
characterization ``q0 beta1 tau sum_n |f_n|^(2q0-2) f_n = p1`` against it.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSet
from .linsolve import LinearOperator, SolveResult, solve_linear
from .mesh import Grid2D, div_coeff_grad, div_coeff_grad_coeff_T, dot_grad, laplacian, norm
from .objective import CostParams, cost_control_partial, mismatch
from .state import StateTrajectory, TimeGrid, check_controls

log = logging.getLogger(__name__)


class NonConvergenceError(RuntimeError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class NonConvergenceWarning(RuntimeWarning):
    pass


# ---------------------------------------------------------------------------
# Exact linearization of one explicit step and its transpose
# ---------------------------------------------------------------------------

def linearized_step(grid: Grid2D, u, p, coef: CoefficientSet, tau: float, du, dp, df):
    """Derivative of ``step_forward`` at ``(u, p)`` along ``(du, dp, df)``."""
    su = (laplacian(grid, coef.dphi(u) * du)
          + div_coeff_grad(grid, coef.dg(u) * du, p, 0.0)
          + div_coeff_grad(grid, coef.g(u), dp, coef.g(0.0)))
    sp = (div_coeff_grad(grid, coef.dd(u) * du, p, 0.0)
          + div_coeff_grad(grid, coef.d(u), dp, coef.d(0.0))
          + df)
    return du + tau * su, dp + tau * sp


def linearized_step_T(grid: Grid2D, u, p, coef: CoefficientSet, tau: float, lu, lp):
    """Transpose of :func:`linearized_step`; returns ``(mu_u, mu_p, mu_f)``."""
    Bu = div_coeff_grad_coeff_T(grid, p, lu)
    Bp = div_coeff_grad_coeff_T(grid, p, lp)
    mu_u = lu + tau * (coef.dphi(u) * laplacian(grid, lu) + coef.dg(u) * Bu + coef.dd(u) * Bp)
    mu_p = lp + tau * (div_coeff_grad(grid, coef.g(u), lu, coef.g(0.0))
                       + div_coeff_grad(grid, coef.d(u), lp, coef.d(0.0)))
    return mu_u, mu_p, tau * lp


@dataclass(frozen=True)
class AdjointTrajectory:
    """Multipliers of the step equations, indexed like the controls.

    ``lam_u[n]``, ``lam_p[n]`` belong to the step from level ``n`` to
    ``n + 1``; the extra entry ``n = N`` is the zero terminal condition.
    """

    lam_u: np.ndarray
    lam_p: np.ndarray


def solve_adjoint_discrete(traj: StateTrajectory, params: CostParams, coef: CoefficientSet,
                           tg: TimeGrid) -> AdjointTrajectory:
    """Backward sweep ``lam[n] = A(x[n+1])^T lam[n+1] - tau * mismatch[n+1]``.

    ``A(x)`` is the linearized step at state ``x``; ``lam[N] = 0``.
    """
    grid, N, tau = traj.grid, tg.N, tg.tau
    if traj.N != N:
        raise ValueError("trajectory and time grid disagree on N")
    du, dp = mismatch(traj, params)
    lam_u = np.zeros((N + 1,) + grid.shape)
    lam_p = np.zeros_like(lam_u)
    for n in range(N - 1, -1, -1):
        m = n + 1
        if m < N:
            mu_u, mu_p, _ = linearized_step_T(grid, traj.u[m], traj.p[m], coef, tau,
                                              lam_u[m], lam_p[m])
        else:
            mu_u = mu_p = 0.0
        lam_u[n] = mu_u - tau * du[n]
        lam_p[n] = mu_p - tau * dp[n]
        if not (np.all(np.isfinite(lam_u[n])) and np.all(np.isfinite(lam_p[n]))):
            raise FloatingPointError(f"non-finite adjoint values at level {n}")
    return AdjointTrajectory(lam_u, lam_p)


def gradient_wrt_control(controls, adj: AdjointTrajectory, params: CostParams,
                         tg: TimeGrid) -> np.ndarray:
    """L2 gradient of the reduced cost: control partial minus ``tau * lam_p``."""
    controls = np.asarray(controls, dtype=float)
    return cost_control_partial(controls, params, tg) - tg.tau * adj.lam_p[:tg.N]


def reduced_gradient(grid: Grid2D, u0, p0, controls, params: CostParams,
                     coef: CoefficientSet, tg: TimeGrid):
    """Forward solve, adjoint sweep and gradient in one call.

    Returns ``(traj, adj, grad)``.
    """
    from .state import solve_forward

    controls = check_controls(grid, tg, controls)
    traj = solve_forward(grid, u0, p0, controls, coef, tg)
    adj = solve_adjoint_discrete(traj, params, coef, tg)
    return traj, adj, gradient_wrt_control(controls, adj, params, tg)


# ---------------------------------------------------------------------------
# Aggregate (stationary) optimality system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AggregateAdjoint:
    e1: np.ndarray
    p1: np.ndarray
    iterations: int
    residual: float
    converged: bool


def _frozen_state(traj: StateTrajectory, level: str):
    if level == "terminal":
        return traj.u[-1], traj.p[-1]
    if level == "average":
        return traj.u[1:].mean(axis=0), traj.p[1:].mean(axis=0)
    raise ValueError(f"level must be 'terminal' or 'average', got {level!r}")


def aggregate_operator(grid: Grid2D, ubar, pbar, coef: CoefficientSet) -> LinearOperator:
    """Left-hand side of the aggregate system acting on ``(e1, p1)``.

    ::

        e1 + div(phi'(u) grad e1) - d'(u) grad p . grad p1
           - phi''(u) grad u . grad e1 - g'(u) grad p . grad e1
        p1 + div(d(u) grad p1) + div(g(u) grad e1)
    """
    a_phi = coef.dphi(ubar)
    b_phi = coef.d2phi(ubar)
    b_g = coef.dg(ubar)
    b_d = coef.dd(ubar)
    g_u = coef.g(ubar)
    d_u = coef.d(ubar)
    a0, d0, g0 = coef.dphi(0.0), coef.d(0.0), coef.g(0.0)

    def apply(e1, p1):
        r1 = (e1 + div_coeff_grad(grid, a_phi, e1, a0)
              - b_d * dot_grad(grid, pbar, p1)
              - b_phi * dot_grad(grid, ubar, e1)
              - b_g * dot_grad(grid, pbar, e1))
        r2 = p1 + div_coeff_grad(grid, d_u, p1, d0) + div_coeff_grad(grid, g_u, e1, g0)
        return r1, r2

    return LinearOperator(apply, (grid.shape, grid.shape))


def aggregate_rhs(traj: StateTrajectory, params: CostParams, tg: TimeGrid):
    du, dp = mismatch(traj, params)
    return tg.tau * du.sum(axis=0), tg.tau * dp.sum(axis=0)


def solve_adjoint_aggregate(traj: StateTrajectory, params: CostParams, coef: CoefficientSet,
                        tg: TimeGrid, tol: float = 1e-10, max_iter: int | None = None,
                        level: str = "terminal", strict: bool = True) -> AggregateAdjoint:
    """Solve the aggregate system for ``(e1, p1)`` by GMRES.

    The operator ``I + div(a grad .)`` is indefinite once the grid resolves
    modes with ``a * |eigenvalue| > 1``, so convergence is not guaranteed.
    Non-convergence raises :class:`NonConvergenceError` when ``strict``,
    otherwise it is logged and warned about and the best iterate returned.
    """
    grid = traj.grid
    ubar, pbar = _frozen_state(traj, level)
    op = aggregate_operator(grid, ubar, pbar, coef)
    res: SolveResult = solve_linear(op, aggregate_rhs(traj, params, tg), tol, max_iter)
    out = AggregateAdjoint(res.x[0], res.x[1], res.iterations, res.residual, res.converged)
    if not res.converged:
        msg = (f"aggregate adjoint system not solved to tol = {tol:.1e}: relative residual "
               f"{res.residual:.3e} after {res.iterations} iterations")
        if strict:
            raise NonConvergenceError(msg, out)
        log.warning(msg)
        warnings.warn(msg, NonConvergenceWarning, stacklevel=2)
    return out


# name used by the operation contract
solve_adjoint_paper = solve_adjoint_aggregate


def control_characterization(controls, params: CostParams, tg: TimeGrid) -> np.ndarray:
    """``q0 beta1 tau sum_n |f_n|^(2q0-2) f_n``."""
    return cost_control_partial(controls, params, tg).sum(axis=0)


def kkt_residual(grid: Grid2D, controls, aggregate: AggregateAdjoint, params: CostParams,
                 tg: TimeGrid) -> float:
    """L2 norm of ``q0 beta1 tau sum_n |f_n|^(2q0-2) f_n - p1``."""
    controls = check_controls(grid, tg, controls)
    grid.check(aggregate.p1)
    return norm(grid, control_characterization(controls, params, tg) - aggregate.p1)
