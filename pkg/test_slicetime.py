"""
Tests for the slice-time schedule and the interpolation of off-schedule layers.
"""

import numpy as np
import pytest

from core_model import GridSpec, IndexRangeError, SliceTimedSeries
from slicetime import (
    LayerTimeQuery, acquisition_time, cell_layer_values, interpolation_weight, rho_at_cell_time
)


def _grid(K, delta_t=1.0, L=3):
    return GridSpec(I=1, J=1, K=K, L=L, delta=1.0, delta_t=delta_t)


def test_acquisition_time_examples():
    assert acquisition_time(0, 0, _grid(2)) == 0.0
    assert acquisition_time(1, 2, _grid(2, 0.5)) == pytest.approx(3.5)
    assert acquisition_time(3, 1, _grid(3, 0.25)) == pytest.approx(1.75)


def test_acquisition_time_range_checks():
    grid = _grid(2)
    with pytest.raises(IndexRangeError):
        acquisition_time(3, 0, grid)
    with pytest.raises(IndexRangeError):
        acquisition_time(0, 4, grid)


def test_interpolation_weight_is_one_over_layers():
    assert interpolation_weight(_grid(1)) == pytest.approx(0.5)
    assert interpolation_weight(_grid(3, 0.25)) == pytest.approx(0.25)


def test_on_schedule_layer_returns_stored_sample(rng):
    grid = _grid(2)
    series = SliceTimedSeries(grid, rng.standard_normal(grid.series_shape))
    for l in range(grid.L):
        value = rho_at_cell_time(series, LayerTimeQuery(1, 0, 2, 2, l))
        assert value == series.values[1, 0, 2, l]


@pytest.mark.parametrize("K, expected", [(1, 3.0), (3, 5.0)])
def test_interpolated_layer(K, expected):
    grid = _grid(K)
    values = np.zeros(grid.series_shape)
    values[0, 1, 0, 1] = 2.0 if K == 1 else 4.0
    values[0, 1, 0, 2] = 4.0 if K == 1 else 8.0
    series = SliceTimedSeries(grid, values)
    assert rho_at_cell_time(series, LayerTimeQuery(0, 1, 0, 1, 1)) == pytest.approx(expected)


def test_interpolated_layer_is_convex(rng):
    grid = _grid(3)
    series = SliceTimedSeries(grid, rng.standard_normal(grid.series_shape))
    for l in range(grid.L):
        for layer in range(grid.K):
            value = rho_at_cell_time(series, LayerTimeQuery(1, 1, layer, layer + 1, l))
            pair = series.values[1, 1, layer, l:l + 2]
            assert pair.min() - 1e-14 <= value <= pair.max() + 1e-14


@pytest.mark.parametrize("query", [
    LayerTimeQuery(2, 0, 1, 1, 0),   # i out of range
    LayerTimeQuery(0, 0, 1, 0, 0),   # cell_k below 1
    LayerTimeQuery(0, 0, 2, 1, 0),   # layer is not a face of the cell
    LayerTimeQuery(0, 0, 1, 1, 3),   # l = L on the top layer
    LayerTimeQuery(0, 0, 1, 1, -1),  # negative cycle
    LayerTimeQuery(0, 0, 0, 1, 3),   # interpolation would need l = L + 1
])
def test_invalid_queries_are_rejected(query):
    grid = _grid(2)
    series = SliceTimedSeries(grid, np.ones(grid.series_shape))
    with pytest.raises(IndexRangeError):
        rho_at_cell_time(series, query)


def test_cell_layer_values_match_pointwise_queries(rng):
    grid = GridSpec(I=2, J=1, K=3, L=4, delta=1.0, delta_t=0.3)
    series = SliceTimedSeries(grid, rng.standard_normal(grid.series_shape))
    top, bottom = cell_layer_values(series, 1, grid.L - 1)
    assert top.shape == bottom.shape == (3, 2, 3, 3)
    for n, l in enumerate(range(1, grid.L)):
        for k in range(1, grid.K + 1):
            for j in range(grid.J + 1):
                for i in range(grid.I + 1):
                    assert top[i, j, k - 1, n] == rho_at_cell_time(series, LayerTimeQuery(i, j, k, k, l))
                    assert bottom[i, j, k - 1, n] == pytest.approx(
                        rho_at_cell_time(series, LayerTimeQuery(i, j, k - 1, k, l)), rel=1e-14
                    )


def test_cell_layer_values_reject_last_cycle():
    grid = _grid(2)
    series = SliceTimedSeries(grid, np.ones(grid.series_shape))
    with pytest.raises(IndexRangeError):
        cell_layer_values(series, 0, grid.L)
