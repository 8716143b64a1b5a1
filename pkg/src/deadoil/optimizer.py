"""Steepest descent with Armijo backtracking on the reduced cost."""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adjoint import kkt_residual, reduced_gradient, solve_adjoint_aggregate
from .coefficients import CoefficientSet
from .mesh import Grid2D, inner, norm
from .objective import CostParams, evaluate_cost
from .state import TimeGrid, check_controls, solve_forward

log = logging.getLogger(__name__)


@dataclass
class OptimizerOptions:
    grad_tol: float = 1e-3
    max_iter: int = 500
    armijo_c: float = 1e-4
    shrink: float = 0.5
    max_shrinks: int = 60
    step_min: float = 1e-8
    step_max: float = 1e8
    initial_step: float = 1.0
    log_kkt: bool = True

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("need grad_tol > 0")
        if not 0 < self.armijo_c < 1:
            raise ValueError("need 0 < armijo_c < 1")
        if not 0 < self.shrink < 1:
            raise ValueError("need 0 < shrink < 1")
        if self.max_iter < 0:
            raise ValueError("need max_iter >= 0")


@dataclass
class OptimizationResult:
    best_control: np.ndarray
    J_history: list[float] = field(default_factory=list)
    grad_norm_history: list[float] = field(default_factory=list)
    kkt_history: list[float] = field(default_factory=list)
    step_history: list[float] = field(default_factory=list)
    shrink_history: list[int] = field(default_factory=list)
    status: str = "iteration-cap"

    @property
    def iterations(self) -> int:
        return len(self.J_history) - 1

    def write_log(self, path) -> None:
        """Convergence log with columns ``iter,J,grad_norm,kkt_residual,step_size,shrinks``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "J", "grad_norm", "kkt_residual", "step_size", "shrinks"])
            for k in range(len(self.J_history)):
                w.writerow([k, f"{self.J_history[k]:.17g}",
                            f"{self.grad_norm_history[k]:.17g}",
                            f"{self.kkt_history[k]:.17g}",
                            f"{self.step_history[k]:.17g}", self.shrink_history[k]])


def _kkt(grid, traj, controls, params, coef, tg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        agg = solve_adjoint_aggregate(traj, params, coef, tg, tol=1e-8, strict=False)
    return kkt_residual(grid, controls, agg, params, tg)


def minimize(grid: Grid2D, u0, p0, initial, params: CostParams, coef: CoefficientSet,
             tg: TimeGrid, opts: OptimizerOptions | None = None) -> OptimizationResult:
    """Minimize ``f -> J(solve_forward(f), f)`` by steepest descent.

    The first trial step of each iteration is a Barzilai-Borwein estimate
    from the previous pair of iterates, clamped to ``[step_min, step_max]``;
    it is then halved (``shrink``) until the Armijo condition
    ``J(f - a g) <= J(f) - armijo_c a |g|^2`` holds. Iteration stops once
    ``|g| <= grad_tol * max(1, |g0|)``.
    """
    opts = opts or OptimizerOptions()
    f = check_controls(grid, tg, initial).copy()
    traj, _, g = reduced_gradient(grid, u0, p0, f, params, coef, tg)
    J = evaluate_cost(traj, f, params, tg)
    gn = norm(grid, g)
    tol = opts.grad_tol * max(1.0, gn)
    res = OptimizationResult(f.copy())

    def record(J, gn, traj, f, step, shrinks):
        kkt = _kkt(grid, traj, f, params, coef, tg) if opts.log_kkt else float("nan")
        res.J_history.append(J)
        res.grad_norm_history.append(gn)
        res.kkt_history.append(kkt)
        res.step_history.append(step)
        res.shrink_history.append(shrinks)
        log.info("iter %d  J = %.10e  |grad| = %.3e  kkt = %.3e  step = %.3e  shrinks = %d",
                 len(res.J_history) - 1, J, gn, kkt, step, shrinks)

    record(J, gn, traj, f, 0.0, 0)
    if gn <= tol:
        res.status = "converged"
        return res

    step = opts.initial_step
    f_prev = g_prev = None
    for _ in range(opts.max_iter):
        if f_prev is not None:
            s = f - f_prev
            y = g - g_prev
            sy = inner(grid, s, y)
            if sy > 0:
                step = inner(grid, s, s) / sy
        step = float(np.clip(step, opts.step_min, opts.step_max))
        gg = gn * gn
        shrinks = 0
        while True:
            trial = f - step * g
            J_trial = evaluate_cost(solve_forward(grid, u0, p0, trial, coef, tg,
                                                  check_stability=False),
                                    trial, params, tg)
            if np.isfinite(J_trial) and J_trial <= J - opts.armijo_c * step * gg:
                break
            shrinks += 1
            if shrinks > opts.max_shrinks:
                res.status = "line-search-failure"
                return res
            step *= opts.shrink
        f_prev, g_prev = f, g
        f = trial
        traj, _, g = reduced_gradient(grid, u0, p0, f, params, coef, tg)
        J = J_trial
        gn = norm(grid, g)
        res.best_control = f.copy()
        record(J, gn, traj, f, step, shrinks)
        if gn <= tol:
            res.status = "converged"
            return res
    res.status = "iteration-cap"
    return res
