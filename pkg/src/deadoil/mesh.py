"""Uniform rectangular grids and the finite-difference stencils built on them.

Fields are plain ``numpy`` arrays of shape ``grid.shape == (nx - 1, ny - 1)``
holding values at interior nodes only. The boundary value is identically
zero and never stored, which realizes the homogeneous Dirichlet condition.

The divergence-form operator ``div(a grad v)`` is assembled from four
one-axis primitives (padding, face averaging, face differencing, nodal
divergence). Each primitive has an explicit transpose, so linearized
operators and their adjoints are exact mirror images of each other.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two fields do not live on the same grid."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid over the rectangle ``[0, lx] x [0, ly]``.

    ``nx`` and ``ny`` count cells, so there are ``(nx - 1) * (ny - 1)``
    interior nodes at ``(i * hx, j * hy)`` for ``i = 1..nx-1``, ``j = 1..ny-1``.
    """

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ValueError("cell counts must be integers")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(
                f"grid too coarse: need nx >= 2 and ny >= 2, got ({self.nx}, {self.ny})")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"domain lengths must be positive, got ({self.lx}, {self.ly})")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx - 1, self.ny - 1)

    @property
    def size(self) -> int:
        return (self.nx - 1) * (self.ny - 1)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def node(self, i: int, j: int) -> tuple[float, float]:
        """Coordinates of interior node ``(i, j)``, 1-based (boundary nodes are 0 and nx)."""
        if not (1 <= i <= self.nx - 1 and 1 <= j <= self.ny - 1):
            raise IndexError(f"({i}, {j}) is not an interior node")
        return (i * self.hx, j * self.hy)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (``indexing='ij'``) of interior node coordinates."""
        x = self.hx * np.arange(1, self.nx)
        y = self.hy * np.arange(1, self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(x, y)`` at the interior nodes."""
        x, y = self.coords()
        return np.broadcast_to(np.asarray(func(x, y), dtype=float), self.shape).copy()

    def sine_mode(self, kx: int = 1, ky: int = 1) -> np.ndarray:
        """``sin(kx pi x / lx) sin(ky pi y / ly)`` sampled at interior nodes."""
        return self.sample(lambda x, y: np.sin(kx * np.pi * x / self.lx)
                           * np.sin(ky * np.pi * y / self.ly))

    def laplacian_eigenvalue(self, kx: int = 1, ky: int = 1) -> float:
        """Eigenvalue of the discrete Laplacian for :meth:`sine_mode`."""
        sx = np.sin(kx * np.pi * self.hx / (2 * self.lx))
        sy = np.sin(ky * np.pi * self.hy / (2 * self.ly))
        return -4.0 * sx**2 / self.hx**2 - 4.0 * sy**2 / self.hy**2

    def check(self, *fields: np.ndarray) -> None:
        for v in fields:
            if np.shape(v) != self.shape:
                raise GridMismatchError(
                    f"field of shape {np.shape(v)} does not match grid shape {self.shape}")


def build_grid(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Grid2D:
    return Grid2D(nx, ny, lx, ly)


# ---------------------------------------------------------------------------
# One-axis primitives and their transposes.
#
# Along an axis with m interior nodes: padding maps m -> m + 2 (boundary
# nodes appended), face operators map m + 2 -> m + 1, and the nodal
# divergence maps m + 1 -> m.
# ---------------------------------------------------------------------------

def _pad_zero(v, axis):
    if axis == 0:
        out = np.zeros((v.shape[0] + 2, v.shape[1]))
        out[1:-1] = v
    else:
        out = np.zeros((v.shape[0], v.shape[1] + 2))
        out[:, 1:-1] = v
    return out


def _pad_coeff(a, axis, boundary):
    """Extend a nodal coefficient to the boundary nodes.

    ``boundary=None`` extrapolates linearly from the two nearest interior
    nodes (a copy when there is only one); a number is used as is.
    """
    if axis == 1:
        return _pad_coeff(a.T, 0, boundary).T
    out = np.empty((a.shape[0] + 2, a.shape[1]))
    out[1:-1] = a
    if boundary is not None:
        out[0] = out[-1] = boundary
    elif a.shape[0] == 1:
        out[0] = out[-1] = a[0]
    else:
        out[0] = 2 * a[0] - a[1]
        out[-1] = 2 * a[-1] - a[-2]
    return out


def _pad_coeff_T(b, axis, extrapolate):
    """Transpose of the linear part of :func:`_pad_coeff`."""
    if axis == 1:
        return _pad_coeff_T(b.T, 0, extrapolate).T
    out = b[1:-1].copy()
    if not extrapolate:
        return out
    if out.shape[0] == 1:
        out[0] += b[0] + b[-1]
    else:
        out[0] += 2 * b[0]
        out[1] -= b[0]
        out[-1] += 2 * b[-1]
        out[-2] -= b[-1]
    return out


def _face_avg(b, axis):
    if axis == 0:
        return 0.5 * (b[1:] + b[:-1])
    return 0.5 * (b[:, 1:] + b[:, :-1])


def _face_avg_T(c, axis):
    if axis == 0:
        out = np.zeros((c.shape[0] + 1, c.shape[1]))
        out[:-1] += 0.5 * c
        out[1:] += 0.5 * c
    else:
        out = np.zeros((c.shape[0], c.shape[1] + 1))
        out[:, :-1] += 0.5 * c
        out[:, 1:] += 0.5 * c
    return out


def _face_diff(b, axis, h):
    if axis == 0:
        return (b[1:] - b[:-1]) / h
    return (b[:, 1:] - b[:, :-1]) / h


_node_div = _face_diff


def _node_div_T(d, axis, h):
    # transpose of the nodal divergence is minus the face gradient of a
    # zero-extended field
    return -_face_diff(_pad_zero(d, axis), axis, h)


def _spacings(grid):
    return (grid.hx, grid.hy)


def face_coefficient(a: np.ndarray, axis: int, boundary: float | None = None) -> np.ndarray:
    """Arithmetic face average of a nodal coefficient.

    The boundary value of ``a`` is ``boundary`` when known, else a linear
    extrapolation of the interior values.
    """
    return _face_avg(_pad_coeff(a, axis, boundary), axis)


def face_gradient(v: np.ndarray, axis: int, grid: Grid2D, boundary: float = 0.0) -> np.ndarray:
    """One-sided face difference of ``v`` with boundary value ``boundary``."""
    h = _spacings(grid)[axis]
    if boundary == 0.0:
        return _face_diff(_pad_zero(v, axis), axis, h)
    return _face_diff(_pad_zero(v - boundary, axis), axis, h)


def div_faces(fx: np.ndarray, fy: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Nodal divergence of face fluxes ``(fx, fy)``."""
    return _node_div(fx, 0, grid.hx) + _node_div(fy, 1, grid.hy)


def div_faces_T(d: np.ndarray, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    return _node_div_T(d, 0, grid.hx), _node_div_T(d, 1, grid.hy)


def face_coefficient_T(c: np.ndarray, axis: int, extrapolate: bool = False) -> np.ndarray:
    """Transpose of the linear part of :func:`face_coefficient`.

    ``extrapolate`` selects the ``boundary=None`` variant; otherwise the
    boundary value is a constant and contributes nothing.
    """
    return _pad_coeff_T(_face_avg_T(c, axis), axis, extrapolate)


# ---------------------------------------------------------------------------
# Public stencils
# ---------------------------------------------------------------------------

def div_coeff_grad(grid: Grid2D, a, v: np.ndarray, a_boundary: float | None = None) -> np.ndarray:
    """Five-point flux form of ``div(a grad v)`` at interior nodes.

    Parameters
    ----------
    grid : Grid2D
    a : array or float
        Coefficient at interior nodes. A scalar is a constant coefficient.
    v : array
        Field at interior nodes; its boundary value is zero.
    a_boundary : float, optional
        Value of ``a`` on the boundary. When omitted it is extrapolated
        linearly from the interior, which keeps the stencil second order.
    """
    grid.check(v)
    if np.ndim(a) == 0:
        ax = ay = float(a)
    else:
        grid.check(a)
        ax = face_coefficient(a, 0, a_boundary)
        ay = face_coefficient(a, 1, a_boundary)
    fx = ax * face_gradient(v, 0, grid)
    fy = ay * face_gradient(v, 1, grid)
    return div_faces(fx, fy, grid)


def laplacian(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    return div_coeff_grad(grid, 1.0, v)


def div_coeff_grad_coeff_T(grid: Grid2D, v: np.ndarray, lam: np.ndarray,
                           extrapolate: bool = False) -> np.ndarray:
    """Transpose of ``a -> div_coeff_grad(grid, a, v, a_boundary)`` at ``lam``.

    The map is affine in ``a``; this transposes its linear part. With a
    fixed ``a_boundary`` that part has a zero boundary value; pass
    ``extrapolate=True`` for the extrapolating variant.
    """
    grid.check(v, lam)
    out = np.zeros(grid.shape)
    for axis, h in enumerate(_spacings(grid)):
        gv = face_gradient(v, axis, grid)
        dl = _node_div_T(lam, axis, h)
        out += face_coefficient_T(gv * dl, axis, extrapolate)
    return out


def dot_grad(grid: Grid2D, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise ``grad a . grad b`` by central differences (zero boundary)."""
    grid.check(a, b)
    pa, pb = _pad_zero(a, 0), _pad_zero(b, 0)
    total = (pa[2:] - pa[:-2]) * (pb[2:] - pb[:-2]) / (4 * grid.hx**2)
    pa, pb = _pad_zero(a, 1), _pad_zero(b, 1)
    total += (pa[:, 2:] - pa[:, :-2]) * (pb[:, 2:] - pb[:, :-2]) / (4 * grid.hy**2)
    return total


def integrate_power(grid: Grid2D, v: np.ndarray, exponent: float) -> float:
    """Nodal quadrature of ``|v|**exponent`` over the domain."""
    if exponent < 1:
        raise ValueError(f"exponent must be >= 1, got {exponent}")
    grid.check(v)
    return float(grid.cell_area * np.sum(np.abs(v) ** exponent))


def inner(grid: Grid2D, a: np.ndarray, b: np.ndarray) -> float:
    """Discrete L2 inner product with the same quadrature weight.

    Accepts stacks of fields (leading axes are summed over as well).
    """
    return float(grid.cell_area * np.sum(np.asarray(a) * np.asarray(b)))


def norm(grid: Grid2D, a: np.ndarray) -> float:
    return float(np.sqrt(inner(grid, a, a)))


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def write_field(path, grid: Grid2D, values: np.ndarray) -> None:
    """Write ``x,y,value`` rows, row-major over interior nodes, 17 digits."""
    grid.check(values)
    x, y = grid.coords()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for xi, yi, vi in zip(x.ravel(), y.ravel(), values.ravel()):
            w.writerow([f"{xi:.17g}", f"{yi:.17g}", f"{vi:.17g}"])


def read_field(path, grid: Grid2D) -> np.ndarray:
    """Read a field written by :func:`write_field` onto ``grid``."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y", "value"]:
        raise ValueError(f"{path}: expected header 'x,y,value'")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    if data.shape != (grid.size, 3):
        raise GridMismatchError(
            f"{path}: {len(data)} rows, grid has {grid.size} interior nodes")
    x, y = grid.coords()
    tol = 1e-9 * max(grid.lx, grid.ly)
    if (np.max(np.abs(data[:, 0] - x.ravel())) > tol
            or np.max(np.abs(data[:, 1] - y.ravel())) > tol):
        raise GridMismatchError(f"{path}: node coordinates do not match the grid")
    if not np.all(np.isfinite(data[:, 2])):
        raise ValueError(f"{path}: non-finite field values")
    return data[:, 2].reshape(grid.shape)
