"""
Slice-Time Schedule

Ascending slice-time acquisition: layer k of cycle l is measured at
t_{k,l} = (k + (K + 1) l) dt. A cell with z index k is evaluated at its top
layer's acquisition time, so its bottom layer k - 1 has to be linearly
interpolated between cycles l and l + 1.

acquisition_time() is the single place that encodes the slice order.
"""

from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np

from core_model import GridSpec, IndexRangeError, SliceTimedSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerTimeQuery:
    """Evaluate rho at grid point (i, j, layer) at the acquisition time of cell level cell_k in cycle l."""

    i: int
    j: int
    layer: int
    cell_k: int
    l: int

    def validate(self, grid: GridSpec) -> None:
        if not (0 <= self.i <= grid.I and 0 <= self.j <= grid.J):
            raise IndexRangeError(
                f"in-plane index ({self.i}, {self.j}) outside 0..{grid.I} x 0..{grid.J}"
            )
        if not 1 <= self.cell_k <= grid.K:
            raise IndexRangeError(f"cell_k={self.cell_k} outside 1..{grid.K}")
        if self.layer not in (self.cell_k - 1, self.cell_k):
            raise IndexRangeError(
                f"layer={self.layer} is not a face of cell_k={self.cell_k} "
                f"(allowed: {self.cell_k - 1}, {self.cell_k})"
            )
        if not 0 <= self.l <= grid.L - 1:
            # l = L would need extrapolation beyond the last cycle
            raise IndexRangeError(f"l={self.l} outside 0..{grid.L - 1} (no extrapolation)")


def acquisition_time(k: int, l: int, grid: GridSpec) -> float:
    """
    Acquisition time of layer k in cycle l.

    Args:
        k (int): z grid index, 0..K
        l (int): cycle index, 0..L
        grid (GridSpec): Grid holding K and delta_t

    Returns:
        float: (k + (K + 1) l) * delta_t in seconds
    """
    if not 0 <= k <= grid.K:
        raise IndexRangeError(f"k={k} outside 0..{grid.K}")
    if not 0 <= l <= grid.L:
        raise IndexRangeError(f"l={l} outside 0..{grid.L}")
    return (k + (grid.K + 1) * l) * grid.delta_t


def interpolation_weight(grid: GridSpec, cell_k: int = 1) -> float:
    """Weight of the (l+1)-th sample of layer cell_k - 1 at time t_{cell_k, l}."""
    gap = acquisition_time(cell_k, 0, grid) - acquisition_time(cell_k - 1, 0, grid)
    return gap / grid.cycle_seconds


def rho_at_cell_time(series: SliceTimedSeries, q: LayerTimeQuery) -> float:
    """
    Value of rho at grid point (q.i, q.j, q.layer) and time t_{q.cell_k, q.l}.

    The top layer of the cell is on schedule and returned as measured; the
    bottom layer is the convex combination of cycles l and l + 1.
    """
    q.validate(series.grid)
    rho = series.values
    if q.layer == q.cell_k:
        return float(rho[q.i, q.j, q.layer, q.l])
    weight = interpolation_weight(series.grid, q.cell_k)
    return float(
        rho[q.i, q.j, q.layer, q.l] * (1.0 - weight) + rho[q.i, q.j, q.layer, q.l + 1] * weight
    )


def cell_layer_values(series: SliceTimedSeries, first_level: int,
                      last_level: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised rho_at_cell_time for every cell level and a range of cycles.

    Args:
        series (SliceTimedSeries): Measured data
        first_level (int): First cycle index l (>= 0)
        last_level (int): Last cycle index l, inclusive (<= L - 1)

    Returns:
        Tuple[np.ndarray, np.ndarray]: (top, bottom), each of shape
        (I+1, J+1, K, n_levels). top[:, :, k-1, n] is rho on layer k at
        t_{k, first_level+n}; bottom[:, :, k-1, n] is rho on layer k-1 at the
        same time.
    """
    grid = series.grid
    if not 0 <= first_level <= last_level <= grid.L - 1:
        raise IndexRangeError(
            f"level range {first_level}..{last_level} outside 0..{grid.L - 1}"
        )
    rho = series.values
    levels = slice(first_level, last_level + 1)
    next_levels = slice(first_level + 1, last_level + 2)
    weight = interpolation_weight(grid)

    top = rho[:, :, 1:, levels]
    bottom = (1.0 - weight) * rho[:, :, :-1, levels] + weight * rho[:, :, :-1, next_levels]
    return top, bottom
