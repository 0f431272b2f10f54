"""
Core Model

Grid/index algebra, the velocity space X and the cell space Y, and their
inner products. Arrays are indexed [i, j, k(, l)]; flattening is x-fastest
(Fortran order), which is also the on-disk payload order.
"""

from dataclasses import dataclass
from typing import Tuple
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


class MraiError(ValueError):
    """Base class for all toolkit errors."""


class GridMismatchError(MraiError):
    """Two objects live on incompatible grids."""


class IndexRangeError(MraiError):
    """A grid, cell or level index lies outside its admissible range."""


class NonFiniteValueError(MraiError):
    """An array that must be finite contains NaN or infinity."""


class ContainerFormatError(MraiError):
    """A file container header or payload is inconsistent."""


class MinorOverflowError(MraiError):
    """The minor recurrence leaves the floating-point range."""


class SolverDivergenceError(MraiError):
    """A non-finite value appeared during the CGNE iteration."""


def _frozen_array(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GridSpec:
    """
    Grid dimensions and spacing.

    Grid points run 0..I, 0..J, 0..K and time cycles 0..L. The voxel pitch
    delta (mm) is the same along every axis; delta_t (s) is the per-slice
    time step, so one full volume takes (K + 1) * delta_t.
    """

    I: int
    J: int
    K: int
    L: int
    delta: float
    delta_t: float

    def __post_init__(self):
        for name in ('I', 'J', 'K'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"GridSpec.{name} must be an integer >= 1, got {value}")
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"GridSpec.L must be an integer >= 2, got {self.L}")
        for name in ('delta', 'delta_t'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"GridSpec.{name} must be finite and > 0, got {value}")

    @property
    def point_shape(self) -> Tuple[int, int, int]:
        return (self.I + 1, self.J + 1, self.K + 1)

    @property
    def series_shape(self) -> Tuple[int, int, int, int]:
        return (self.I + 1, self.J + 1, self.K + 1, self.L + 1)

    @property
    def cell_shape(self) -> Tuple[int, int, int, int]:
        return (self.I, self.J, self.K, self.L - 1)

    @property
    def velocity_shape(self) -> Tuple[int, int, int, int]:
        return (3,) + self.point_shape

    @property
    def dim_x(self) -> int:
        return 3 * (self.I + 1) * (self.J + 1) * (self.K + 1)

    @property
    def dim_y(self) -> int:
        return self.I * self.J * self.K * (self.L - 1)

    @property
    def cycle_seconds(self) -> float:
        return (self.K + 1) * self.delta_t

    def same_space(self, other: 'GridSpec') -> bool:
        """True when both grids share the spatial lattice (I, J, K, delta)."""
        return (self.I, self.J, self.K, self.delta) == (other.I, other.J, other.K, other.delta)


def _check_shape(name: str, values: np.ndarray, expected: Tuple[int, ...]) -> None:
    if values.shape != expected:
        raise GridMismatchError(f"{name} has shape {values.shape}, expected {expected}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class SliceTimedSeries:
    """Measured values rho[i, j, k, l], layer k of cycle l taken at t_{k,l}."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen_array(self.values))
        _check_shape('SliceTimedSeries.values', self.values, self.grid.series_shape)

    def scaled(self, factor: float) -> 'SliceTimedSeries':
        return SliceTimedSeries(self.grid, factor * self.values)


@dataclass(frozen=True)
class VelocityField:
    """
    An element of X: three components v_m on the grid points, mm/s.

    components has shape (3, I+1, J+1, K+1). The same type holds the CG
    work vectors w and p.
    """

    grid: GridSpec
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'components', _frozen_array(self.components))
        _check_shape('VelocityField.components', self.components, self.grid.velocity_shape)

    @classmethod
    def zeros(cls, grid: GridSpec) -> 'VelocityField':
        return cls(grid, np.zeros(grid.velocity_shape))

    @classmethod
    def from_flat(cls, grid: GridSpec, flat: np.ndarray) -> 'VelocityField':
        """Inverse of ravel(): three x-fastest component blocks."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != grid.dim_x:
            raise GridMismatchError(f"flat velocity has {flat.size} values, expected {grid.dim_x}")
        blocks = flat.reshape(3, -1)
        return cls(grid, np.stack([b.reshape(grid.point_shape, order='F') for b in blocks]))

    def ravel(self) -> np.ndarray:
        return np.concatenate([c.ravel(order='F') for c in self.components])

    def norms(self) -> np.ndarray:
        """Euclidean norm of the velocity vector at every grid point."""
        return np.sqrt(np.sum(self.components ** 2, axis=0))

    def _other(self, other: 'VelocityField') -> np.ndarray:
        if not isinstance(other, VelocityField):
            raise TypeError(f"expected VelocityField, got {type(other).__name__}")
        if not self.grid.same_space(other.grid):
            raise GridMismatchError(
                f"velocity shapes differ: {self.components.shape} vs {other.components.shape}"
            )
        return other.components

    def __add__(self, other: 'VelocityField') -> 'VelocityField':
        return VelocityField(self.grid, self.components + self._other(other))

    def __sub__(self, other: 'VelocityField') -> 'VelocityField':
        return VelocityField(self.grid, self.components - self._other(other))

    def __mul__(self, factor: float) -> 'VelocityField':
        return VelocityField(self.grid, self.components * float(factor))

    __rmul__ = __mul__

    def __neg__(self) -> 'VelocityField':
        return VelocityField(self.grid, -self.components)


@dataclass(frozen=True)
class CellField:
    """An element of Y: values c[i-1, j-1, k-1, l-1] for the interior cells and levels 1..L-1."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen_array(self.values))
        _check_shape('CellField.values', self.values, self.grid.cell_shape)

    @classmethod
    def zeros(cls, grid: GridSpec) -> 'CellField':
        return cls(grid, np.zeros(grid.cell_shape))

    @classmethod
    def from_flat(cls, grid: GridSpec, flat: np.ndarray) -> 'CellField':
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != grid.dim_y:
            raise GridMismatchError(f"flat cell field has {flat.size} values, expected {grid.dim_y}")
        return cls(grid, flat.reshape(grid.cell_shape, order='F'))

    def ravel(self) -> np.ndarray:
        return self.values.ravel(order='F')

    def _other(self, other: 'CellField') -> np.ndarray:
        if not isinstance(other, CellField):
            raise TypeError(f"expected CellField, got {type(other).__name__}")
        if self.values.shape != other.values.shape:
            raise GridMismatchError(
                f"cell field shapes differ: {self.values.shape} vs {other.values.shape}"
            )
        return other.values

    def __add__(self, other: 'CellField') -> 'CellField':
        return CellField(self.grid, self.values + self._other(other))

    def __sub__(self, other: 'CellField') -> 'CellField':
        return CellField(self.grid, self.values - self._other(other))

    def __mul__(self, factor: float) -> 'CellField':
        return CellField(self.grid, self.values * float(factor))

    __rmul__ = __mul__

    def __neg__(self) -> 'CellField':
        return CellField(self.grid, -self.values)


def inner_y(c: CellField, d: CellField) -> float:
    """
    Euclidean inner product on Y.

    Args:
        c (CellField): First cell field
        d (CellField): Second cell field

    Returns:
        float: sum over all cells and levels of c * d

    Raises:
        GridMismatchError: If the two fields have different shapes
    """
    if c.values.shape != d.values.shape:
        raise GridMismatchError(f"inner_y shape mismatch: {c.values.shape} vs {d.values.shape}")
    return float(np.sum(c.values * d.values))


def norm_y(c: CellField) -> float:
    return math.sqrt(inner_y(c, c))


def inner_x(v: VelocityField, w: VelocityField) -> float:
    """
    H1-like inner product on X.

    L2 term over all components plus (1/delta^2)-weighted first differences
    of v1 along x, v2 along y and v3 along z.

    Args:
        v (VelocityField): First velocity field
        w (VelocityField): Second velocity field

    Returns:
        float: <v, w>_X

    Raises:
        GridMismatchError: If the two fields do not share a spatial grid
    """
    if not v.grid.same_space(w.grid):
        raise GridMismatchError(
            f"inner_x shape mismatch: {v.components.shape} (delta={v.grid.delta}) "
            f"vs {w.components.shape} (delta={w.grid.delta})"
        )
    a, b = v.components, w.components
    total = np.sum(a * b)
    gradient_part = 0.0
    for m in range(3):
        gradient_part += np.sum(np.diff(a[m], axis=m) * np.diff(b[m], axis=m))
    return float(total + gradient_part / v.grid.delta ** 2)


def norm_x(v: VelocityField) -> float:
    return math.sqrt(inner_x(v, v))
