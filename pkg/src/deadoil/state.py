"""The time-discrete saturation/pressure system and its linearization.

With uniform step ``tau = T / N`` the explicit scheme reads, at every
interior node,

    (u[n+1] - u[n]) / tau = lap phi(u[n]) + div(g(u[n]) grad p[n])
    (p[n+1] - p[n]) / tau = div(d(u[n]) grad p[n]) + f[n]

with ``u = p = 0`` on the boundary and ``u[0] = u0``, ``p[0] = p0``.
Because ``u`` vanishes on the boundary, ``phi(u)`` takes the boundary value
``phi(0)`` there; the Laplacian is applied to ``phi(u) - phi(0)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSet
from .mesh import Grid2D, div_coeff_grad, face_gradient, laplacian

log = logging.getLogger(__name__)


class InstabilityError(FloatingPointError):
    """A forward step produced non-finite values."""


class StabilityWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of ``[0, T]`` into ``N`` steps."""

    T: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"need an integer N >= 1, got {self.N}")
        if not self.T > 0:
            raise ValueError(f"need T > 0, got {self.T}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    def t(self, n: int) -> float:
        return n * self.tau


@dataclass(frozen=True)
class StateTrajectory:
    """States at levels ``0..N``; arrays of shape ``(N + 1, *grid.shape)``."""

    grid: Grid2D
    u: np.ndarray
    p: np.ndarray

    @property
    def N(self) -> int:
        return self.u.shape[0] - 1


def check_controls(grid: Grid2D, tg: TimeGrid, controls: np.ndarray) -> np.ndarray:
    controls = np.asarray(controls, dtype=float)
    if controls.shape != (tg.N,) + grid.shape:
        raise ValueError(
            f"controls must have shape {(tg.N,) + grid.shape}, got {controls.shape}")
    if not np.all(np.isfinite(controls)):
        raise ValueError("controls contain non-finite values")
    return controls


# ---------------------------------------------------------------------------
# Spatial operator
# ---------------------------------------------------------------------------

def phi_laplacian(grid: Grid2D, u: np.ndarray, coef: CoefficientSet) -> np.ndarray:
    """``lap phi(u)`` with the boundary value ``phi(0)``."""
    return laplacian(grid, coef.phi(u) - coef.phi(0.0))


def spatial_rhs(grid, u, p, f, coef):
    """Right-hand sides of both equations at one time level.

    Coefficients ``g(u)``, ``d(u)`` take their boundary values at ``u = 0``.
    """
    su = (phi_laplacian(grid, u, coef)
          + div_coeff_grad(grid, coef.g(u), p, coef.g(0.0)))
    sp = div_coeff_grad(grid, coef.d(u), p, coef.d(0.0)) + f
    return su, sp


def residual_F(grid: Grid2D, u_n, u_next, p_n, p_next, f_n, coef: CoefficientSet,
               tg: TimeGrid):
    """Residual of one step of the scheme; zero when ``(u_next, p_next)``
    is the step taken from ``(u_n, p_n)`` under control ``f_n``.

    The initial-trace rows are not returned: they hold by construction of
    :class:`StateTrajectory`.
    """
    grid.check(u_n, u_next, p_n, p_next, f_n)
    su, sp = spatial_rhs(grid, u_n, p_n, f_n, coef)
    r1 = (u_next - u_n) / tg.tau - su
    r2 = (p_next - p_n) / tg.tau - sp
    return r1, r2


def step_forward(grid: Grid2D, u_n, p_n, f_n, coef: CoefficientSet, tg: TimeGrid):
    grid.check(u_n, p_n, f_n)
    su, sp = spatial_rhs(grid, u_n, p_n, f_n, coef)
    u_next = u_n + tg.tau * su
    p_next = p_n + tg.tau * sp
    if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(p_next))):
        raise InstabilityError(
            f"non-finite state after a step with tau = {tg.tau:.3e}; the explicit "
            f"scheme needs tau <= stability_bound(...)")
    return u_next, p_next


def max_gradient(grid: Grid2D, p: np.ndarray) -> float:
    """Largest face-difference magnitude of ``p`` (the ``p_scale`` input)."""
    return float(max(np.max(np.abs(face_gradient(p, 0, grid))),
                     np.max(np.abs(face_gradient(p, 1, grid)))))


def stability_bound(grid: Grid2D, coef: CoefficientSet, p_scale: float = 0.0) -> float:
    """Conservative explicit step limit.

    The diffusion rate is bounded by ``max(c2, c3)``: ``c3`` bounds
    ``phi'`` and ``c2`` bounds ``d``. ``p_scale`` bounds ``|grad p|`` for the
    transport-like coupling term.
    """
    diff = max(coef.c2, coef.c3) * (2 / grid.hx**2 + 2 / grid.hy**2)
    adv = coef.c2 * p_scale * (1 / grid.hx + 1 / grid.hy)
    return 0.5 / (diff + adv)


def solve_forward(grid: Grid2D, u0, p0, controls, coef: CoefficientSet, tg: TimeGrid,
                  check_stability: bool = True) -> StateTrajectory:
    """Run the explicit scheme from ``(u0, p0)`` through all ``N`` steps."""
    grid.check(u0, p0)
    controls = check_controls(grid, tg, controls)
    if check_stability:
        bound = stability_bound(grid, coef, max_gradient(grid, p0))
        if tg.tau > bound:
            warnings.warn(f"tau = {tg.tau:.3e} exceeds the explicit stability bound "
                          f"{bound:.3e}", StabilityWarning, stacklevel=2)
    u = np.empty((tg.N + 1,) + grid.shape)
    p = np.empty_like(u)
    u[0], p[0] = u0, p0
    for n in range(tg.N):
        try:
            u[n + 1], p[n + 1] = step_forward(grid, u[n], p[n], controls[n], coef, tg)
        except InstabilityError as exc:
            raise InstabilityError(f"step {n}: {exc}") from None
    return StateTrajectory(grid, u, p)


# ---------------------------------------------------------------------------
# Gateaux derivative
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateauxDirection:
    e: np.ndarray
    w: np.ndarray
    h: np.ndarray

    def __mul__(self, s):
        return GateauxDirection(s * self.e, s * self.w, s * self.h)

    __rmul__ = __mul__

    def __add__(self, other):
        return GateauxDirection(self.e + other.e, self.w + other.w, self.h + other.h)


def gateaux_apply(grid: Grid2D, u_n, p_n, f_n, direction: GateauxDirection,
                  coef: CoefficientSet):
    """Directional derivative ``(xi1, xi3)`` of the state operator.

    ::

        xi1 = e - div(phi'(u) grad e) - div(phi''(u) e grad u)
                - div(g(u) grad w) - div(g'(u) e grad p)
        xi3 = w - div(d(u) grad w) - div(d'(u) e grad p) - h

    Each term is the exact derivative of the corresponding stencil in
    :func:`spatial_rhs`. The trace components are the direction's own
    initial values and are not returned.
    """
    e, w, h = direction.e, direction.w, direction.h
    grid.check(u_n, p_n, f_n, e, w, h)
    d1 = coef.dphi(u_n)
    d1_0 = coef.dphi(0.0)
    # phi''(u) grad u enters as the face difference of phi'(u); with this
    # split the two phi terms sum to lap(phi'(u) e) exactly
    t_phi1 = div_coeff_grad(grid, d1, e, d1_0)
    t_phi2 = div_coeff_grad(grid, e, d1 - d1_0, 0.0)
    t_g1 = div_coeff_grad(grid, coef.g(u_n), w, coef.g(0.0))
    t_g2 = div_coeff_grad(grid, coef.dg(u_n) * e, p_n, 0.0)
    t_d1 = div_coeff_grad(grid, coef.d(u_n), w, coef.d(0.0))
    t_d2 = div_coeff_grad(grid, coef.dd(u_n) * e, p_n, 0.0)
    xi1 = e - t_phi1 - t_phi2 - t_g1 - t_g2
    xi3 = w - t_d1 - t_d2 - h
    return xi1, xi3


def frozen_operator(grid: Grid2D, u, p, f, coef: CoefficientSet):
    """The state operator with each time difference replaced by the bare
    current level. Its exact derivative is :func:`gateaux_apply`, so finite
    differences of it serve as the oracle."""
    su, sp = spatial_rhs(grid, u, p, f, coef)
    return u - su, p - sp
