"""Matrix-free GMRES for small nonsymmetric, possibly indefinite systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class BreakdownError(ArithmeticError):
    pass


@dataclass
class LinearOperator:
    """Linear action on a tuple of equally shaped arrays (a block vector)."""

    apply: Callable
    shapes: tuple

    @property
    def size(self) -> int:
        return int(sum(np.prod(s) for s in self.shapes))

    def flatten(self, blocks) -> np.ndarray:
        return np.concatenate([np.ravel(b) for b in blocks])

    def unflatten(self, x: np.ndarray) -> tuple:
        out, k = [], 0
        for s in self.shapes:
            n = int(np.prod(s))
            out.append(x[k:k + n].reshape(s))
            k += n
        return tuple(out)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.flatten(self.apply(*self.unflatten(x)))


@dataclass
class SolveResult:
    x: tuple
    iterations: int
    residual: float
    converged: bool
    history: list = field(default_factory=list)


def solve_linear(op: LinearOperator, rhs, tol: float = 1e-10, max_iter: int | None = None,
                 x0=None) -> SolveResult:
    """GMRES without restarts.

    Returns the minimal-residual iterate. ``residual`` is the true relative
    residual ``|op(x) - rhs| / |rhs|`` recomputed from the returned ``x``.
    """
    if not tol > 0:
        raise ValueError("need tol > 0")
    n = op.size
    if max_iter is None:
        max_iter = n
    if max_iter < 1:
        raise ValueError("need max_iter >= 1")
    b = op.flatten(rhs)
    if not np.all(np.isfinite(b)):
        raise FloatingPointError("right-hand side has non-finite values")
    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else op.flatten(x0)
    if bnorm == 0.0:
        return SolveResult(op.unflatten(np.zeros(n)), 0, 0.0, True, [0.0])

    r = b - op.matvec(x)
    beta = np.linalg.norm(r)
    history = [beta / bnorm]
    if beta <= tol * bnorm:
        return SolveResult(op.unflatten(x), 0, beta / bnorm, True, history)

    m = min(max_iter, n)
    V = np.zeros((m + 1, n))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    V[0] = r / beta
    k = 0
    for j in range(m):
        w = op.matvec(V[j])
        if not np.all(np.isfinite(w)):
            raise FloatingPointError(f"operator produced non-finite values at iteration {j + 1}")
        # classical Gram-Schmidt, applied twice
        h = V[:j + 1] @ w
        w = w - V[:j + 1].T @ h
        h2 = V[:j + 1] @ w
        w = w - V[:j + 1].T @ h2
        h += h2
        H[:j + 1, j] = h
        hnext = np.linalg.norm(w)
        H[j + 1, j] = hnext
        for i in range(j):
            a, c = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * a + sn[i] * c
            H[i + 1, j] = -sn[i] * a + cs[i] * c
        den = np.hypot(H[j, j], H[j + 1, j])
        if den == 0.0:
            raise BreakdownError(f"GMRES breakdown at iteration {j + 1}")
        cs[j], sn[j] = H[j, j] / den, H[j + 1, j] / den
        H[j, j] = den
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        H[j + 1, j] = 0.0
        k = j + 1
        history.append(abs(g[j + 1]) / bnorm)
        if abs(g[j + 1]) <= tol * bnorm:
            break
        # lucky breakdown: Krylov space is invariant, solution is exact
        if hnext <= 1e-14 * beta:
            break
        V[j + 1] = w / hnext

    y = np.linalg.solve(np.triu(H[:k, :k]), g[:k])
    x = x + V[:k].T @ y
    res = np.linalg.norm(b - op.matvec(x)) / bnorm
    return SolveResult(op.unflatten(x), k, float(res), bool(res <= tol), history)
