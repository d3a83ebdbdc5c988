"""Wirtinger derivatives, Laplacian, and boundary traces on tensor grids.

First derivatives use 4th-order centered stencils in the interior and
2nd-order one-sided stencils on the two outermost node layers.  The
Laplacian is the classical 5-point stencil; the factorization
``lap = 4 * dz(dzbar(.))`` holds to stencil accuracy and is exercised in
the tests.
"""

from __future__ import annotations

import numpy as np

from .errors import GridError
from .grid import BoundaryPartition
from .fields import VectorField, MatrixField, same_kind


def _diff(data: np.ndarray, h: float, axis: int) -> np.ndarray:
    """First derivative along x (axis 0) or y (axis 1), broadcasting trailing axes."""
    if data.shape[axis] < 5:
        raise GridError("grid too small for the derivative stencil")
    f = np.moveaxis(data, axis, 0)
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[1] = (f[2] - f[0]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    out[-2] = (f[-1] - f[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _diff2(data: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative, 3-point centered; one-sided 2nd order at the edges."""
    if data.shape[axis] < 5:
        raise GridError("grid too small for the derivative stencil")
    f = np.moveaxis(data, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[:-2] - 2 * f[1:-1] + f[2:]) / (h * h)
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h)
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def dx_array(data: np.ndarray, grid) -> np.ndarray:
    return _diff(data, grid.h_x, 0)


def dy_array(data: np.ndarray, grid) -> np.ndarray:
    return _diff(data, grid.h_y, 1)


def dz_array(data: np.ndarray, grid) -> np.ndarray:
    """Wirtinger d/dz = (d/dx - i d/dy)/2 on raw samples."""
    return 0.5 * (_diff(data, grid.h_x, 0) - 1j * _diff(data, grid.h_y, 1))


def dzbar_array(data: np.ndarray, grid) -> np.ndarray:
    """Wirtinger d/dzbar = (d/dx + i d/dy)/2 on raw samples."""
    return 0.5 * (_diff(data, grid.h_x, 0) + 1j * _diff(data, grid.h_y, 1))


def laplacian_array(data: np.ndarray, grid) -> np.ndarray:
    return _diff2(data, grid.h_x, 0) + _diff2(data, grid.h_y, 1)


def wirtinger_dz(f):
    """d/dz of a VectorField or MatrixField; linear, returns the same kind."""
    return same_kind(f, f.grid, dz_array(np.asarray(f.data), f.grid))


def wirtinger_dzbar(f):
    """d/dzbar of a VectorField or MatrixField."""
    return same_kind(f, f.grid, dzbar_array(np.asarray(f.data), f.grid))


def laplacian(f):
    """5-point Laplacian of a VectorField or MatrixField."""
    return same_kind(f, f.grid, laplacian_array(np.asarray(f.data), f.grid))


def trace_boundary(f: VectorField, part: BoundaryPartition, label: str) -> np.ndarray:
    """Samples of ``f`` at the nodes of the labeled arcs, in arc order.

    Returns shape (n_nodes, N).
    """
    if f.grid != part.grid:
        raise GridError("field and partition grids differ")
    ii, jj, _, _ = part.nodes(label)
    return np.array(f.data[ii, jj, :])


def normal_derivative(f: VectorField, part: BoundaryPartition, label: str) -> np.ndarray:
    """2nd-order one-sided outward normal derivative at labeled nodes.

    Returns shape (n_nodes, N), in arc order.
    """
    if f.grid != part.grid:
        raise GridError("field and partition grids differ")
    g = f.grid
    d = f.data
    out = []
    for edge in part.arcs(label):
        if edge == "bottom":
            v = -(-3 * d[:, 0] + 4 * d[:, 1] - d[:, 2]) / (2 * g.h_y)
        elif edge == "top":
            v = (3 * d[:, -1] - 4 * d[:, -2] + d[:, -3]) / (2 * g.h_y)
        elif edge == "left":
            v = -(-3 * d[0, 1:-1] + 4 * d[1, 1:-1] - d[2, 1:-1]) / (2 * g.h_x)
        else:  # right
            v = (3 * d[-1, 1:-1] - 4 * d[-2, 1:-1] + d[-3, 1:-1]) / (2 * g.h_x)
        out.append(v)
    return np.concatenate(out, axis=0)
