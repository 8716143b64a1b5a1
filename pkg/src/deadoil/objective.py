"""Discrete tracking cost and its control derivative.

    J = tau/2 * sum_{n=1..N} ( |u[n] - U|^2 + |p[n] - P|^2 + beta1 * int |f[n-1]|^(2 q0) )

Level ``n`` of the state is paired with the control applied on the step
that produced it, stored at index ``n - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Grid2D, integrate_power
from .state import StateTrajectory, TimeGrid, check_controls


@dataclass(frozen=True)
class CostParams:
    """Penalty weights and tracking targets.

    ``U`` and ``P`` are single fields, or stacks of ``N + 1`` fields for
    per-level targets (level 0 is ignored). ``q0 = 1`` is admitted as the
    quadratic limit.
    """

    U: np.ndarray
    P: np.ndarray
    beta1: float = 1e-2
    q0: float = 1.0
    beta2: float = 0.0

    def __post_init__(self):
        if not self.beta1 > 0:
            raise ValueError(f"need beta1 > 0, got {self.beta1}")
        if not self.q0 >= 1:
            raise ValueError(f"need q0 > 1 (q0 = 1 admitted), got q0 = {self.q0}")
        if self.beta2 != 0:
            raise ValueError("the beta2 |d_t f|^2 penalty is not supported; beta2 must be 0")

    def targets(self, grid: Grid2D, N: int):
        """Targets broadcast to shape ``(N, *grid.shape)`` for levels 1..N."""
        out = []
        for T in (self.U, self.P):
            T = np.asarray(T, dtype=float)
            if T.shape == grid.shape:
                out.append(np.broadcast_to(T, (N,) + grid.shape))
            elif T.shape == (N + 1,) + grid.shape:
                out.append(T[1:])
            else:
                raise ValueError(f"target of shape {T.shape} does not fit grid {grid.shape} "
                                 f"with N = {N}")
        return out


def mismatch(traj: StateTrajectory, params: CostParams):
    """``(u[n] - U, p[n] - P)`` for ``n = 1..N``."""
    U, P = params.targets(traj.grid, traj.N)
    return traj.u[1:] - U, traj.p[1:] - P


def control_term(grid: Grid2D, controls: np.ndarray, params: CostParams, tg: TimeGrid) -> float:
    """``tau/2 * beta1 * sum_n int |f|^(2 q0)``."""
    total = sum(integrate_power(grid, fn, 2 * params.q0) for fn in controls)
    return 0.5 * tg.tau * params.beta1 * total


def evaluate_cost(traj: StateTrajectory, controls: np.ndarray, params: CostParams,
                  tg: TimeGrid) -> float:
    grid = traj.grid
    if traj.N != tg.N:
        raise ValueError(f"trajectory has {traj.N + 1} levels, time grid needs {tg.N + 1}")
    controls = check_controls(grid, tg, controls)
    du, dp = mismatch(traj, params)
    track = grid.cell_area * (np.sum(du * du) + np.sum(dp * dp))
    return float(0.5 * tg.tau * track + control_term(grid, controls, params, tg))


def cost_control_partial(controls: np.ndarray, params: CostParams, tg: TimeGrid) -> np.ndarray:
    """``tau * q0 * beta1 * |f|^(2 q0 - 2) * f`` per level and node.

    This is the L2 gradient of :func:`control_term`: its discrete inner
    product with a direction is the directional derivative.
    """
    f = np.asarray(controls, dtype=float)
    if params.q0 == 1:
        return tg.tau * params.beta1 * f
    return tg.tau * params.q0 * params.beta1 * np.abs(f) ** (2 * params.q0 - 2) * f
