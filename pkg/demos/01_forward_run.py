"""Forward run on the desk grid.

Explicit Euler is only conditionally stable, so we start from the step
limit, run one stable and one unstable configuration, and watch what the
saturating coefficients do to the unstable one.
"""

import warnings

import numpy as np

from deadoil import (Grid2D, InstabilityError, TimeGrid, builtin_set, solve_forward,
                     stability_bound)
from deadoil.state import max_gradient

grid = Grid2D(17, 17)
coef = builtin_set("default", 1.0, 2.0)
s = grid.sine_mode(1, 1)
u0, p0 = 0.5 * s, s

limit = stability_bound(grid, coef, max_gradient(grid, p0))
print(f"step limit for h = 1/17: tau <= {limit:.3e}")
for N in (8, 256):
    print(f"  T = 0.05, N = {N:3d} -> tau = {0.05 / N:.3e}")

tg = TimeGrid(0.05, 256)
f = np.broadcast_to(5.0 * s, (tg.N,) + grid.shape)
traj = solve_forward(grid, u0, p0, f, coef, tg)
print("\nstable run with f = 5 sin(pi x) sin(pi y)")
for n in range(0, tg.N + 1, 64):
    print(f"  t = {tg.t(n):.4f}   max u = {traj.u[n].max():.4f}   max p = {traj.p[n].max():.4f}")

# N = 8 violates the limit by a factor of ~30; the instability needs a few
# hundred steps to overflow, so run longer at the same tau
bad = TimeGrid(0.05 / 8 * 400, 400)
with warnings.catch_warnings(record=True) as caught, np.errstate(all="ignore"):
    warnings.simplefilter("always")
    try:
        solve_forward(grid, u0, p0, np.zeros((bad.N,) + grid.shape), coef, bad)
        print("\nunstable run finished (saturation kept it bounded)")
    except InstabilityError as exc:
        print(f"\nunstable run stopped: {exc}")
for w in caught:
    print(f"warning raised up front: {w.message}")
