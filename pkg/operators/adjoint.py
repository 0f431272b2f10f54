"""
Adjoint Operator

T* with respect to the H1-like inner product on X. The Gram matrix of that
inner product splits into one constant tridiagonal block per grid line,

    (1 / delta^2) * tridiag(-1, [a, b, ..., b, a], -1),  a = delta^2 + 1, b = a + 1,

so T* d = delta^2 * M^{-1} (T^T d) is obtained line by line. The line
solves use the leading principal minors r_i of M (a two-term recurrence),
which turns elimination into one forward and one backward sweep.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple
import logging
import math

import numpy as np

from config import MINOR_OVERFLOW_LIMIT
from core_model import (
    CellField, GridMismatchError, GridSpec, MinorOverflowError, SliceTimedSeries, VelocityField
)
from slicetime import cell_layer_values
from .base_operator import AdjointResult

logger = logging.getLogger(__name__)

CORNER_OFFSETS = tuple((alpha, beta, gamma) for alpha in (0, 1) for beta in (0, 1) for gamma in (0, 1))


@dataclass(frozen=True)
class MinorTable:
    """
    Leading principal minors of the line Gram matrix.

    r holds r_{-1}, r_0, ..., r_n (so r_m is stored at r[m + 1]); r_bar maps
    an axis length n to r_n - r_{n-1}, the determinant of the full n+1 block.
    """

    a: float
    b_diag: float
    r: np.ndarray
    r_bar: Dict[int, float] = field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.a - 1.0

    @property
    def max_index(self) -> int:
        return len(self.r) - 2

    def minor(self, i: int) -> float:
        """r_i for -1 <= i <= max_index."""
        return float(self.r[i + 1])

    def boundary(self, n: int) -> float:
        """r_bar_n = r_n - r_{n-1}."""
        if n in self.r_bar:
            return self.r_bar[n]
        if not 1 <= n <= self.max_index:
            raise ValueError(f"no minors for axis length {n} (table covers up to {self.max_index})")
        return self.minor(n) - self.minor(n - 1)

    @classmethod
    def for_grid(cls, grid: GridSpec) -> 'MinorTable':
        return minor_sequence(max(grid.I, grid.J, grid.K), grid.delta, (grid.I, grid.J, grid.K))


def minor_sequence(n: int, delta: float, axis_lengths: Optional[Iterable[int]] = None) -> MinorTable:
    """
    Build the minor table r_{-1}..r_n for pitch delta.

    Args:
        n (int): Largest index needed, max{I, J, K}
        delta (float): Voxel pitch in mm
        axis_lengths (Iterable[int], optional): Axis lengths whose r_bar is
            precomputed. Defaults to (n,).

    Returns:
        MinorTable: a, b_diag, r and r_bar

    Raises:
        ValueError: If n < 1 or delta is not positive
        MinorOverflowError: If r_n leaves the floating-point range
    """
    if int(n) != n or n < 1:
        raise ValueError(f"axis length n must be an integer >= 1, got {n}")
    if not math.isfinite(delta) or delta <= 0:
        raise ValueError(f"delta must be finite and > 0, got {delta}")

    h = delta * delta
    a = h + 1.0
    b_diag = a + 1.0

    r = np.empty(n + 2)
    r[0] = 1.0
    r[1] = a
    for i in range(1, n + 1):
        r[i + 1] = b_diag * r[i] - r[i - 1]
        if not math.isfinite(r[i + 1]) or r[i + 1] > MINOR_OVERFLOW_LIMIT:
            raise MinorOverflowError(
                f"minor r_{i} exceeds {MINOR_OVERFLOW_LIMIT:.0e} for delta={delta}; "
                f"axis length {n} is too long for the line solve"
            )
    r.setflags(write=False)

    lengths = (n,) if axis_lengths is None else tuple(axis_lengths)
    r_bar = {}
    for length in lengths:
        if not 1 <= length <= n:
            raise ValueError(f"axis length {length} outside 1..{n}")
        r_bar[length] = float(r[length + 1] - r[length])

    logger.debug(f"Minor table: a={a}, b={b_diag}, n={n}, r_n={r[-1]:.3e}")
    return MinorTable(a=a, b_diag=b_diag, r=r, r_bar=r_bar)


def line_solve(e: np.ndarray, table: MinorTable, axis: int = -1) -> Tuple[np.ndarray, float]:
    """
    Solve M w = e along one axis for every line at once.

    M is the (n+1) x (n+1) tridiagonal matrix with diagonal [a, b, ..., b, a]
    and off-diagonal -1.

    Args:
        e (np.ndarray): Right-hand sides; the solve runs along `axis`
        table (MinorTable): Minors for this pitch, covering n = len - 1
        axis (int): Axis holding the line index

    Returns:
        Tuple[np.ndarray, float]: w with the shape of e, and kappa = sum(e * w)
        accumulated in backward-sweep order
    """
    e = np.moveaxis(np.asarray(e, dtype=np.float64), axis, -1)
    n = e.shape[-1] - 1
    if n < 1 or n > table.max_index:
        raise GridMismatchError(
            f"line of length {n + 1} does not fit minor table with max index {table.max_index}"
        )
    r = table.r

    # forward sweep: w_i = e_i r_{i-1} + w_{i-1}
    w = np.cumsum(e * r[: n + 1], axis=-1)

    w[..., n] /= table.boundary(n)
    kappa = float(np.sum(e[..., n] * w[..., n]))

    # backward sweep: w_i = (w_i + r_{i-1} w_{i+1}) / r_i
    for i in range(n - 1, -1, -1):
        w[..., i] = (w[..., i] + r[i] * w[..., i + 1]) / r[i + 1]
        kappa += float(np.sum(e[..., i] * w[..., i]))

    return np.moveaxis(w, -1, axis), kappa


def corner_tensors(d_values: np.ndarray, top: np.ndarray,
                   bottom: np.ndarray) -> Dict[Tuple[int, int, int], np.ndarray]:
    """
    c_{alpha,beta,gamma} on the grid points.

    c_{alpha,beta,gamma}[i, j, k] = sum_l d[cell (i+alpha, j+beta, k+gamma), l]
    * rho_{i,j,k}(t_{k+gamma, l}); entries whose cell falls outside the grid
    are zero.
    """
    I, J, K, _ = d_values.shape
    padded = np.zeros((I + 2, J + 2) + d_values.shape[2:])
    padded[1:-1, 1:-1] = d_values

    tensors = {}
    for alpha, beta, gamma in CORNER_OFFSETS:
        d_shift = padded[alpha:alpha + I + 1, beta:beta + J + 1]
        c = np.zeros((I + 1, J + 1, K + 1))
        if gamma == 0:
            c[:, :, 1:] = np.sum(d_shift * top, axis=-1)
        else:
            c[:, :, :-1] = np.sum(d_shift * bottom, axis=-1)
        tensors[(alpha, beta, gamma)] = c
    return tensors


def transpose_sums(tensors: Dict[Tuple[int, int, int], np.ndarray]) -> np.ndarray:
    """
    Signed corner combinations e_1, e_2, e_3 (the Euclidean T^T d).

    Component m takes + for offset 1 and - for offset 0 along its own axis.
    """
    e = np.zeros((3,) + tensors[(0, 0, 0)].shape)
    for offsets, c in tensors.items():
        for m in range(3):
            if offsets[m] == 1:
                e[m] += c
            else:
                e[m] -= c
    return e


def adjoint_with_layers(grid: GridSpec, d_values: np.ndarray, top: np.ndarray,
                        bottom: np.ndarray, table: MinorTable) -> AdjointResult:
    """T* d from precomputed layer values on levels 1..L-1."""
    e = transpose_sums(corner_tensors(d_values, top, bottom))
    w = np.empty_like(e)
    kappa = 0.0
    for m in range(3):
        w[m], contribution = line_solve(e[m], table, axis=m)
        kappa += contribution

    h = grid.delta ** 2
    return AdjointResult(w=VelocityField(grid, h * w), kappa=kappa, norm_sq=h * kappa)


def apply_T_star(series: SliceTimedSeries, d: CellField,
                 table: Optional[MinorTable] = None) -> AdjointResult:
    """
    Compute T* d and kappa with <T*d, T*d>_X = delta^2 kappa.

    Args:
        series (SliceTimedSeries): Measured data defining T
        d (CellField): Cell residual
        table (MinorTable, optional): Precomputed minors for series.grid

    Returns:
        AdjointResult: w = T* d, kappa and norm_sq

    Raises:
        GridMismatchError: If d does not live on the series grid
    """
    grid = series.grid
    if d.values.shape != grid.cell_shape:
        raise GridMismatchError(f"cell field shape {d.values.shape} vs series cells {grid.cell_shape}")
    if table is None:
        table = MinorTable.for_grid(grid)
    top, bottom = cell_layer_values(series, 1, grid.L - 1)
    return adjoint_with_layers(grid, d.values, top, bottom, table)
