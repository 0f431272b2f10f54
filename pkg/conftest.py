"""
Shared test fixtures and dense oracles.

The oracles rebuild T, b and the Gram matrix of inner_x entry by entry with
plain loops, independent of the vectorised code under test.
"""

import numpy as np
import pytest

from core_model import CellField, GridSpec, SliceTimedSeries, VelocityField
from operators.base_operator import AdjointResult, LinearOperatorPair


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    """(I, J, K, L) = (2, 2, 2, 3): dim Y = 16, dim X = 81."""
    return GridSpec(I=2, J=2, K=2, L=3, delta=1.4, delta_t=2.0 / 3.0)


def random_series(grid: GridSpec, rng: np.random.Generator) -> SliceTimedSeries:
    return SliceTimedSeries(grid, rng.uniform(0.5, 2.0, grid.series_shape))


def smooth_series(grid: GridSpec, rng: np.random.Generator) -> SliceTimedSeries:
    """Sum of two random low-frequency plane waves on a positive baseline."""
    i, j, k, l = np.meshgrid(*(np.arange(n) for n in grid.series_shape), indexing='ij')
    values = np.full(grid.series_shape, 2.0)
    for _ in range(2):
        freq = rng.uniform(0.2, 0.8, 4)
        phase = rng.uniform(0.0, 2 * np.pi)
        values += 0.4 * np.sin(freq[0] * i + freq[1] * j + freq[2] * k + freq[3] * l + phase)
    return SliceTimedSeries(grid, values)


def random_velocity(grid: GridSpec, rng: np.random.Generator) -> VelocityField:
    return VelocityField(grid, rng.standard_normal(grid.velocity_shape))


def random_cells(grid: GridSpec, rng: np.random.Generator) -> CellField:
    return CellField(grid, rng.standard_normal(grid.cell_shape))


def point_index(grid: GridSpec, m: int, i: int, j: int, k: int) -> int:
    nx, ny, nz = grid.point_shape
    return m * nx * ny * nz + i + nx * (j + ny * k)


def cell_index(grid: GridSpec, i: int, j: int, k: int, l: int) -> int:
    """Row of cell (i, j, k), level l (all 1-based) in the flattened Y vector."""
    return (i - 1) + grid.I * ((j - 1) + grid.J * ((k - 1) + grid.K * (l - 1)))


def transcribed_rho(series: SliceTimedSeries, i: int, j: int, layer: int, cell_k: int, l: int) -> float:
    rho = series.values
    K = series.grid.K
    if layer == cell_k:
        return rho[i, j, layer, l]
    return rho[i, j, layer, l] * (1.0 - 1.0 / (K + 1)) + rho[i, j, layer, l + 1] * (1.0 / (K + 1))


def transcribed_D(series: SliceTimedSeries, i: int, j: int, k: int, l: int) -> float:
    total = 0.0
    for ck in (k - 1, k):
        for cj in (j - 1, j):
            for ci in (i - 1, i):
                total += transcribed_rho(series, ci, cj, ck, k, l)
    return total


def transcribed_abc(series: SliceTimedSeries, v: np.ndarray, i: int, j: int, k: int, l: int):
    """A, B, C written out term by term."""
    def r(ci, cj, ck):
        return transcribed_rho(series, ci, cj, ck, k, l)

    v1, v2, v3 = v
    a = (r(i - 1, j - 1, k - 1) * v1[i - 1, j - 1, k - 1] + r(i - 1, j, k - 1) * v1[i - 1, j, k - 1]
         + r(i - 1, j - 1, k) * v1[i - 1, j - 1, k] + r(i - 1, j, k) * v1[i - 1, j, k]
         - r(i, j - 1, k - 1) * v1[i, j - 1, k - 1] - r(i, j, k - 1) * v1[i, j, k - 1]
         - r(i, j - 1, k) * v1[i, j - 1, k] - r(i, j, k) * v1[i, j, k])
    b = (r(i - 1, j - 1, k - 1) * v2[i - 1, j - 1, k - 1] + r(i, j - 1, k - 1) * v2[i, j - 1, k - 1]
         + r(i - 1, j - 1, k) * v2[i - 1, j - 1, k] + r(i, j - 1, k) * v2[i, j - 1, k]
         - r(i - 1, j, k - 1) * v2[i - 1, j, k - 1] - r(i, j, k - 1) * v2[i, j, k - 1]
         - r(i - 1, j, k) * v2[i - 1, j, k] - r(i, j, k) * v2[i, j, k])
    c = (r(i - 1, j - 1, k - 1) * v3[i - 1, j - 1, k - 1] + r(i, j - 1, k - 1) * v3[i, j - 1, k - 1]
         + r(i - 1, j, k - 1) * v3[i - 1, j, k - 1] + r(i, j, k - 1) * v3[i, j, k - 1]
         - r(i - 1, j - 1, k) * v3[i - 1, j - 1, k] - r(i, j - 1, k) * v3[i, j - 1, k]
         - r(i - 1, j, k) * v3[i - 1, j, k] - r(i, j, k) * v3[i, j, k])
    return a, b, c


def dense_T(series: SliceTimedSeries) -> np.ndarray:
    """T as a dim_y x dim_x matrix, one transcribed row per cell and level."""
    grid = series.grid
    matrix = np.zeros((grid.dim_y, grid.dim_x))
    for l in range(1, grid.L):
        for k in range(1, grid.K + 1):
            for j in range(1, grid.J + 1):
                for i in range(1, grid.I + 1):
                    row = cell_index(grid, i, j, k, l)
                    for ck in (k - 1, k):
                        for cj in (j - 1, j):
                            for ci in (i - 1, i):
                                rho = transcribed_rho(series, ci, cj, ck, k, l)
                                signs = (1.0 if ci == i - 1 else -1.0,
                                         1.0 if cj == j - 1 else -1.0,
                                         1.0 if ck == k - 1 else -1.0)
                                for m in range(3):
                                    matrix[row, point_index(grid, m, ci, cj, ck)] += signs[m] * rho
    return matrix


def transcribed_rhs(series: SliceTimedSeries) -> np.ndarray:
    """b as a flat dim_y vector."""
    grid = series.grid
    b = np.zeros(grid.dim_y)
    scale = grid.delta / (2.0 * (grid.K + 1) * grid.delta_t)
    for l in range(1, grid.L):
        for k in range(1, grid.K + 1):
            for j in range(1, grid.J + 1):
                for i in range(1, grid.I + 1):
                    b[cell_index(grid, i, j, k, l)] = (
                        transcribed_D(series, i, j, k, l) - transcribed_D(series, i, j, k, l - 1)
                    ) * scale
    return b


def gram_matrix(grid: GridSpec) -> np.ndarray:
    """Gram matrix of inner_x built pair by pair from its definition."""
    h = grid.delta ** 2
    G = np.eye(grid.dim_x)
    nx, ny, nz = grid.point_shape
    for m in range(3):
        step = [(1, 0, 0), (0, 1, 0), (0, 0, 1)][m]
        for k in range(nz - step[2]):
            for j in range(ny - step[1]):
                for i in range(nx - step[0]):
                    p = point_index(grid, m, i, j, k)
                    q = point_index(grid, m, i + step[0], j + step[1], k + step[2])
                    G[p, p] += 1.0 / h
                    G[q, q] += 1.0 / h
                    G[p, q] -= 1.0 / h
                    G[q, p] -= 1.0 / h
    return G


def line_matrix(n: int, delta: float) -> np.ndarray:
    """(n+1) x (n+1) line block: diagonal [a, b, ..., b, a], off-diagonal -1."""
    a = delta ** 2 + 1.0
    M = np.diag(np.full(n + 1, a + 1.0)) - np.eye(n + 1, k=1) - np.eye(n + 1, k=-1)
    M[0, 0] = M[n, n] = a
    return M


class DenseOperatorPair(LinearOperatorPair):
    """T from the transcription oracle, T* = G^{-1} T^T."""

    def __init__(self, series: SliceTimedSeries):
        super().__init__(name="Dense oracle")
        self.grid = series.grid
        self.T = dense_T(series)
        self.G = gram_matrix(series.grid)

    def apply(self, v: VelocityField) -> CellField:
        self.applications += 1
        return CellField.from_flat(self.grid, self.T @ v.ravel())

    def adjoint(self, d: CellField) -> AdjointResult:
        self.adjoint_applications += 1
        w = np.linalg.solve(self.G, self.T.T @ d.ravel())
        norm_sq = float(w @ self.G @ w)
        return AdjointResult(
            w=VelocityField.from_flat(self.grid, w),
            kappa=norm_sq / self.grid.delta ** 2,
            norm_sq=norm_sq,
        )


def dense_cgne(T: np.ndarray, G: np.ndarray, b: np.ndarray, itmax: int):
    """CG on the normal equations with explicit matrices; returns all iterates."""
    v = np.zeros(T.shape[1])
    d = b.copy()
    iterates = [v.copy()]
    p = None
    gamma = 0.0
    for it in range(itmax):
        w = np.linalg.solve(G, T.T @ d)
        kappa = w @ G @ w
        p = w if it == 0 else w + (kappa / gamma) * p
        gamma = kappa
        q = T @ p
        alpha = gamma / (q @ q)
        v = v + alpha * p
        d = d - alpha * q
        iterates.append(v.copy())
    return iterates
