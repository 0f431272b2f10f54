"""
Forward Operator

Matrix-free application of T and assembly of the right-hand side b of
T v = b. Both are built from the corner sums of a voxel: D (the trilinear
volume quadrature of rho) and A, B, C (the bilinear face quadratures of
rho * v_m, upstream face positive, downstream face negative).

corner_sum_D() and flux_sums() evaluate one cell directly from the
definitions; apply_T() and assemble_rhs() do the same for all cells at once.
"""

from dataclasses import dataclass
from typing import List, Tuple
import logging

import numpy as np

from core_model import (
    CellField, GridMismatchError, IndexRangeError, SliceTimedSeries, VelocityField
)
from slicetime import LayerTimeQuery, cell_layer_values, rho_at_cell_time

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CornerStencil:
    """The eight grid points (i-1..i) x (j-1..j) x (k-1..k) of cell (i, j, k)."""

    i: int
    j: int
    k: int

    def validate(self, grid) -> None:
        if not (1 <= self.i <= grid.I and 1 <= self.j <= grid.J and 1 <= self.k <= grid.K):
            raise IndexRangeError(
                f"cell ({self.i}, {self.j}, {self.k}) outside "
                f"1..{grid.I} x 1..{grid.J} x 1..{grid.K}"
            )

    def corners(self) -> List[Tuple[int, int, int]]:
        return [
            (ci, cj, ck)
            for ck in (self.k - 1, self.k)
            for cj in (self.j - 1, self.j)
            for ci in (self.i - 1, self.i)
        ]


def _corner_rho(series: SliceTimedSeries, stencil: CornerStencil, l: int):
    for ci, cj, ck in stencil.corners():
        rho = rho_at_cell_time(series, LayerTimeQuery(ci, cj, ck, stencil.k, l))
        yield (ci, cj, ck), rho


def corner_sum_D(series: SliceTimedSeries, i: int, j: int, k: int, l: int) -> float:
    """
    Sum of rho over the eight corners of cell (i, j, k) at time t_{k,l}.

    Args:
        series (SliceTimedSeries): Measured data
        i, j, k (int): Cell indices, 1-based
        l (int): Cycle index, 0..L-1

    Returns:
        float: D_{i,j,k}(t_{k,l})
    """
    stencil = CornerStencil(i, j, k)
    stencil.validate(series.grid)
    if not 0 <= l <= series.grid.L - 1:
        raise IndexRangeError(f"l={l} outside 0..{series.grid.L - 1}")
    return float(sum(rho for _, rho in _corner_rho(series, stencil, l)))


def flux_sums(series: SliceTimedSeries, v: VelocityField, i: int, j: int, k: int,
              l: int) -> Tuple[float, float, float]:
    """
    Face flux sums (A, B, C) of cell (i, j, k) at time t_{k,l}.

    A is the sum of rho * v1 over the four corners on the x_{i-1} face minus
    the same sum over the x_i face; B and C likewise in y (v2) and z (v3).
    """
    stencil = CornerStencil(i, j, k)
    stencil.validate(series.grid)
    if not 1 <= l <= series.grid.L - 1:
        raise IndexRangeError(f"l={l} outside 1..{series.grid.L - 1}")
    if not series.grid.same_space(v.grid):
        raise GridMismatchError(
            f"series grid {series.grid.point_shape} vs velocity grid {v.grid.point_shape}"
        )

    a = b = c = 0.0
    for (ci, cj, ck), rho in _corner_rho(series, stencil, l):
        v1, v2, v3 = v.components[:, ci, cj, ck]
        a += rho * v1 if ci == i - 1 else -rho * v1
        b += rho * v2 if cj == j - 1 else -rho * v2
        c += rho * v3 if ck == k - 1 else -rho * v3
    return a, b, c


def _pair_sum(values: np.ndarray, axis: int) -> np.ndarray:
    """Sum of neighbouring entries along axis (n -> n-1)."""
    lo = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return values[tuple(lo)] + values[tuple(hi)]


def _pair_diff(values: np.ndarray, axis: int) -> np.ndarray:
    """Lower neighbour minus upper neighbour along axis (n -> n-1)."""
    lo = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return values[tuple(lo)] - values[tuple(hi)]


def corner_sums(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    """D for every cell from precomputed layer values, shape (I, J, K, n)."""
    return _pair_sum(_pair_sum(top + bottom, 0), 1)


def apply_with_layers(components: np.ndarray, top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    """
    A + B + C for every cell and level from precomputed layer values.

    Args:
        components (np.ndarray): Velocity, shape (3, I+1, J+1, K+1)
        top (np.ndarray): rho on each cell's top layer, shape (I+1, J+1, K, n)
        bottom (np.ndarray): rho on each cell's bottom layer, same shape

    Returns:
        np.ndarray: (T v) values, shape (I, J, K, n)
    """
    v1, v2, v3 = components

    x_flux = top * v1[:, :, 1:, None] + bottom * v1[:, :, :-1, None]
    a = _pair_diff(_pair_sum(x_flux, 1), 0)

    y_flux = top * v2[:, :, 1:, None] + bottom * v2[:, :, :-1, None]
    b = _pair_diff(_pair_sum(y_flux, 0), 1)

    lower = _pair_sum(_pair_sum(bottom * v3[:, :, :-1, None], 0), 1)
    upper = _pair_sum(_pair_sum(top * v3[:, :, 1:, None], 0), 1)

    return a + b + (lower - upper)


def apply_T(series: SliceTimedSeries, v: VelocityField) -> CellField:
    """
    Apply T to a velocity field.

    Args:
        series (SliceTimedSeries): Measured data defining the operator
        v (VelocityField): Velocity coefficients

    Returns:
        CellField: (T v)_{i,j,k,l} = A + B + C at t_{k,l}, l = 1..L-1

    Raises:
        GridMismatchError: If the velocity lives on a different spatial grid
    """
    grid = series.grid
    if not grid.same_space(v.grid):
        raise GridMismatchError(
            f"series grid {grid.point_shape} vs velocity grid {v.grid.point_shape}"
        )
    top, bottom = cell_layer_values(series, 1, grid.L - 1)
    return CellField(grid, apply_with_layers(v.components, top, bottom))


def rhs_from_layers(top: np.ndarray, bottom: np.ndarray, delta: float,
                    cycle_seconds: float) -> np.ndarray:
    """b from layer values on levels 0..L-1."""
    d_sums = corner_sums(top, bottom)
    return (d_sums[..., 1:] - d_sums[..., :-1]) * delta / (2.0 * cycle_seconds)


def assemble_rhs(series: SliceTimedSeries) -> CellField:
    """
    Right-hand side b of T v = b.

    b_{i,j,k,l} = (D(t_{k,l}) - D(t_{k,l-1})) * delta / (2 (K + 1) dt) for
    l = 1..L-1.
    """
    grid = series.grid
    top, bottom = cell_layer_values(series, 0, grid.L - 1)
    values = rhs_from_layers(top, bottom, grid.delta, grid.cycle_seconds)
    logger.debug(f"Assembled rhs on cell grid {grid.cell_shape}, max |b| = {np.max(np.abs(values)):.3e}")
    return CellField(grid, values)
