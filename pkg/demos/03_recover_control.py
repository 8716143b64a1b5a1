"""Steepest descent towards a reference trajectory.

Targets come from a forward solve driven by f* = 5 sin sin. Starting
from f = 0 the optimizer reduces J and the gradient; the penalty term
keeps the optimum away from f* itself. The KKT column measures the
stationary aggregate system against the same iterate and is only
reported: it is a different discretization of the optimality system
and does not vanish at the discrete optimum.
"""

import numpy as np

from deadoil import (CostParams, Grid2D, OptimizerOptions, TimeGrid, builtin_set, minimize,
                     norm, solve_forward)

grid = Grid2D(17, 17)
coef = builtin_set()
tg = TimeGrid(0.05, 256)
s = grid.sine_mode(1, 1)
u0, p0 = 0.5 * s, s
f_star = np.broadcast_to(5.0 * s, (tg.N,) + grid.shape).copy()
ref = solve_forward(grid, u0, p0, f_star, coef, tg)

for beta1 in (1e-2, 1e-5):
    params = CostParams(ref.u, ref.p, beta1=beta1, q0=1.0)
    res = minimize(grid, u0, p0, np.zeros_like(f_star), params, coef, tg,
                   OptimizerOptions(grad_tol=1e-9, max_iter=300))
    print(f"beta1 = {beta1:g}: {res.status} after {res.iterations} iterations")
    print(" iter            J       |grad|          kkt     step")
    for k in range(0, res.iterations + 1, max(1, res.iterations // 8)):
        print(f"{k:5d} {res.J_history[k]:12.5e} {res.grad_norm_history[k]:12.5e} "
              f"{res.kkt_history[k]:12.5e} {res.step_history[k]:8.2e}")
    gap = norm(grid, res.best_control[tg.N // 2] - f_star[tg.N // 2]) / norm(grid, f_star[0])
    print(f"  relative distance to f* at mid-horizon: {gap:.3f}\n")
