"""Independent checks: central-difference derivative oracles and
manufactured-solution convergence studies."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .coefficients import CoefficientSet
from .mesh import Grid2D
from .state import GateauxDirection, TimeGrid, frozen_operator, spatial_rhs, stability_bound


def fd_directional(evaluate, at: np.ndarray, direction: np.ndarray, s: float = 1e-5) -> float:
    """``(evaluate(at + s dir) - evaluate(at - s dir)) / (2 s)``."""
    if not s > 0:
        raise ValueError("need s > 0")
    plus = evaluate(at + s * direction)
    minus = evaluate(at - s * direction)
    if not (np.isfinite(plus) and np.isfinite(minus)):
        raise FloatingPointError("non-finite evaluation in finite-difference oracle")
    return float((plus - minus) / (2 * s))


def fd_gateaux(grid: Grid2D, point, direction: GateauxDirection, coef: CoefficientSet,
               s: float = 1e-5):
    """Central difference of the state operator along ``(e, w, h)``.

    ``point`` is ``(u, p, f)``. The operator differenced is
    :func:`~deadoil.state.frozen_operator`, whose time-difference rows are
    frozen to the bare current level.
    """
    if not s > 0:
        raise ValueError("need s > 0")
    u, p, f = point
    e, w, h = direction.e, direction.w, direction.h
    a1, a2 = frozen_operator(grid, u + s * e, p + s * w, f + s * h, coef)
    b1, b2 = frozen_operator(grid, u - s * e, p - s * w, f - s * h, coef)
    out = (a1 - b1) / (2 * s), (a2 - b2) / (2 * s)
    if not all(np.all(np.isfinite(o)) for o in out):
        raise FloatingPointError("non-finite evaluation in finite-difference oracle")
    return out


def smooth_field(grid: Grid2D, rng: np.random.Generator, modes: int = 3) -> np.ndarray:
    """Random combination of the lowest ``modes x modes`` sine modes, max-norm O(1)."""
    c = rng.uniform(-1.0, 1.0, (modes, modes))
    return sum(c[i, j] * grid.sine_mode(i + 1, j + 1)
               for i in range(modes) for j in range(modes)) / modes


def smooth_control(grid: Grid2D, N: int, rng: np.random.Generator, modes: int = 3) -> np.ndarray:
    """Random smooth space-time direction: a few spatial modes with random
    time profiles, normalized to unit discrete L2 norm per level on average."""
    t = (np.arange(N) + 0.5) / N
    out = np.zeros((N,) + grid.shape)
    for _ in range(modes):
        a, b, w = rng.uniform(-1.0, 1.0, 3)
        profile = a + b * np.cos(np.pi * (1 + 2 * w) * t)
        out += profile[:, None, None] * smooth_field(grid, rng, modes)
    scale = np.sqrt(grid.cell_area * np.sum(out * out) / N)
    return out / scale


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

X, Y, T = sp.symbols("x y t", real=True)


@dataclass
class ConvergenceRow:
    hx: float
    tau: float
    err_u: float
    err_p: float
    order_u: float = float("nan")
    order_p: float = float("nan")


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow] = field(default_factory=list)

    @property
    def orders_u(self) -> list[float]:
        return [r.order_u for r in self.rows[1:]]

    @property
    def orders_p(self) -> list[float]:
        return [r.order_p for r in self.rows[1:]]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["hx", "tau", "err_u", "err_p", "order_u", "order_p"])
            for r in self.rows:
                w.writerow([f"{v:.17g}" for v in (r.hx, r.tau, r.err_u, r.err_p,
                                                  r.order_u, r.order_p)])

    def __str__(self):
        lines = [f"{'hx':>10} {'tau':>10} {'err_u':>11} {'err_p':>11} {'ord_u':>6} {'ord_p':>6}"]
        for r in self.rows:
            lines.append(f"{r.hx:10.4g} {r.tau:10.3e} {r.err_u:11.3e} {r.err_p:11.3e} "
                         f"{r.order_u:6.2f} {r.order_p:6.2f}")
        return "\n".join(lines)


class _Exact:
    """Lambdified exact field with the derivatives the forcing needs."""

    def __init__(self, expr):
        expr = sp.sympify(expr, locals={"x": X, "y": Y, "t": T})
        args = (X, Y, T)
        self.value = sp.lambdify(args, expr, "numpy")
        self.dt = sp.lambdify(args, sp.diff(expr, T), "numpy")
        self.dx = sp.lambdify(args, sp.diff(expr, X), "numpy")
        self.dy = sp.lambdify(args, sp.diff(expr, Y), "numpy")
        self.lap = sp.lambdify(args, sp.diff(expr, X, 2) + sp.diff(expr, Y, 2), "numpy")

    def at(self, fn, grid, t):
        x, y = grid.coords()
        return np.broadcast_to(np.asarray(fn(x, y, t), dtype=float), grid.shape)


def _analytic_forcing(grid, U, Pe, coef, t):
    u = U.at(U.value, grid, t)
    ux, uy = U.at(U.dx, grid, t), U.at(U.dy, grid, t)
    px, py = Pe.at(Pe.dx, grid, t), Pe.at(Pe.dy, grid, t)
    lap_u, lap_p = U.at(U.lap, grid, t), Pe.at(Pe.lap, grid, t)
    grad_uu = ux * ux + uy * uy
    grad_up = ux * px + uy * py
    lap_phi = coef.dphi(u) * lap_u + coef.d2phi(u) * grad_uu
    div_g = coef.dg(u) * grad_up + coef.g(u) * lap_p
    div_d = coef.dd(u) * grad_up + coef.d(u) * lap_p
    fu = U.at(U.dt, grid, t) - lap_phi - div_g
    fp = Pe.at(Pe.dt, grid, t) - div_d
    return fu, fp


def _discrete_forcing(grid, U, Pe, coef, t):
    u = U.at(U.value, grid, t)
    p = Pe.at(Pe.value, grid, t)
    su, sp_ = spatial_rhs(grid, u, p, 0.0, coef)
    return U.at(U.dt, grid, t) - su, Pe.at(Pe.dt, grid, t) - sp_


def mms_run(grid: Grid2D, tg: TimeGrid, exact_u, exact_p, coef: CoefficientSet,
            forcing: str = "analytic") -> tuple[float, float]:
    """Max-norm errors at ``t = T`` of the forced scheme against the exact pair.

    ``forcing="analytic"`` uses the continuous residual of the exact pair,
    so the error contains both space and time discretization.
    ``forcing="discrete"`` uses the residual of the discrete spatial
    operator, which isolates the time discretization error.
    """
    U, Pe = _Exact(exact_u), _Exact(exact_p)
    force = {"analytic": _analytic_forcing, "discrete": _discrete_forcing}[forcing]
    u = U.at(U.value, grid, 0.0).copy()
    p = Pe.at(Pe.value, grid, 0.0).copy()
    for n in range(tg.N):
        t = tg.t(n)
        fu, fp = force(grid, U, Pe, coef, t)
        su, sp_ = spatial_rhs(grid, u, p, fp, coef)
        u, p = u + tg.tau * (su + fu), p + tg.tau * sp_
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(p))):
            raise FloatingPointError(
                f"instability in manufactured-solution run (hx = {grid.hx:.4g}, "
                f"tau = {tg.tau:.3e}, step {n})")
    eu = float(np.max(np.abs(u - U.at(U.value, grid, tg.T))))
    ep = float(np.max(np.abs(p - Pe.at(Pe.value, grid, tg.T))))
    return eu, ep


def _order(e0, e1, ratio):
    if e0 == 0 or e1 == 0:
        return float("nan")
    return float(np.log(e0 / e1) / np.log(ratio))


def mms_study(exact_u, exact_p, coef: CoefficientSet, grids: list[Grid2D],
              tg_list: list[TimeGrid], forcing: str = "analytic") -> ConvergenceReport:
    """Run :func:`mms_run` on each ``(grid, time grid)`` pair.

    Observed orders are taken against ``hx`` when it changes between
    consecutive runs, else against ``tau``.
    """
    if not grids or len(grids) != len(tg_list):
        raise ValueError("need equally long, nonempty grid and time-grid lists")
    rep = ConvergenceReport()
    for grid, tg in zip(grids, tg_list):
        eu, ep = mms_run(grid, tg, exact_u, exact_p, coef, forcing)
        row = ConvergenceRow(grid.hx, tg.tau, eu, ep)
        if rep.rows:
            prev = rep.rows[-1]
            ratio = prev.hx / row.hx if prev.hx != row.hx else prev.tau / row.tau
            row.order_u = _order(prev.err_u, eu, ratio)
            row.order_p = _order(prev.err_p, ep, ratio)
        rep.rows.append(row)
    return rep


MMS_EXACT = "sin(pi*x)*sin(pi*y)*exp(-t)"


def refinement_studies(coef: CoefficientSet, T: float = 0.02, levels: int = 4,
                       exact_u: str = MMS_EXACT, exact_p: str = MMS_EXACT):
    """Standard space and time studies on the unit square.

    Space: ``8, 16, 32, ...`` cells with ``tau`` proportional to ``h^2``
    (a quarter per refinement, starting at half the stability bound).
    Time: a fixed 15 x 15 interior grid with ``tau`` halving, using the
    discrete forcing so the spatial error does not mask the time error.
    Returns ``(space, time)`` reports.
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    grids = [Grid2D(8 * 2**k, 8 * 2**k) for k in range(levels)]
    n0 = int(np.ceil(T / (0.5 * stability_bound(grids[0], coef, 2 * np.pi))))
    space = mms_study(exact_u, exact_p, coef, grids,
                      [TimeGrid(T, n0 * 4**k) for k in range(levels)])
    g16 = Grid2D(16, 16)
    n0 = int(np.ceil(T / (0.5 * stability_bound(g16, coef, 2 * np.pi))))
    time = mms_study(exact_u, exact_p, coef, [g16] * levels,
                     [TimeGrid(T, n0 * 2**k) for k in range(levels)], forcing="discrete")
    return space, time
