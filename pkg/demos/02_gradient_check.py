"""Adjoint gradient against central differences.

The discrete adjoint differentiates the scheme itself, so the agreement
with finite differences is limited only by the difference quotient: the
error should fall like s^2 until round-off takes over.
"""

import numpy as np

from deadoil import (CostParams, Grid2D, TimeGrid, builtin_set, evaluate_cost, inner,
                     reduced_gradient, solve_forward)
from deadoil.oracle import fd_directional, smooth_control

grid = Grid2D(17, 17)
coef = builtin_set()
tg = TimeGrid(0.05, 256)
s = grid.sine_mode(1, 1)
u0, p0 = 0.5 * s, s
f_star = np.broadcast_to(5.0 * s, (tg.N,) + grid.shape).copy()
ref = solve_forward(grid, u0, p0, f_star, coef, tg)

rng = np.random.default_rng(0)
for q0 in (1.0, 1.5, 2.0):
    params = CostParams(ref.u, ref.p, beta1=1e-2, q0=q0)
    f = 0.4 * f_star
    _, _, grad = reduced_gradient(grid, u0, p0, f, params, coef, tg)
    d = smooth_control(grid, tg.N, rng)
    exact = inner(grid, grad, d)

    def J(ff):
        return evaluate_cost(solve_forward(grid, u0, p0, ff, coef, tg), ff, params, tg)

    print(f"q0 = {q0}: <grad, d> = {exact:.12e}")
    for step in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        fd = fd_directional(J, f, d, step)
        print(f"   s = {step:.0e}   rel error {abs(fd - exact) / abs(exact):.3e}")
