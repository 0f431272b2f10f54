"""
Advection Operator

Production (T, T*) pair for a fixed slice-timed series, plus the random
adjoint-identity suite behind the `adjoint-check` command.
"""

from dataclasses import dataclass
import logging

import numpy as np

from config import ADJOINT_CHECK_MAX_AXES, ADJOINT_CHECK_MAX_LEVELS
from core_model import (
    CellField, GridMismatchError, GridSpec, SliceTimedSeries, VelocityField
)
from slicetime import cell_layer_values
from .adjoint import MinorTable, adjoint_with_layers
from .base_operator import AdjointResult, LinearOperatorPair
from .forward import apply_with_layers

logger = logging.getLogger(__name__)


class AdvectionOperator(LinearOperatorPair):
    """
    Matrix-free T and T* around one SliceTimedSeries.

    The interpolated layer values for levels 1..L-1 and the minor table are
    computed once here and shared by every application.
    """

    def __init__(self, series: SliceTimedSeries):
        """
        Initialize the operator.

        Args:
            series (SliceTimedSeries): Measured data defining T
        """
        super().__init__(name="Advection operator")
        self.series = series
        self.grid = series.grid
        self.top, self.bottom = cell_layer_values(series, 1, self.grid.L - 1)
        self.table = MinorTable.for_grid(self.grid)

        logger.info(
            f"Initialized {self.name}: X dim {self.grid.dim_x}, Y dim {self.grid.dim_y}"
        )

    def apply(self, v: VelocityField) -> CellField:
        if not self.grid.same_space(v.grid):
            raise GridMismatchError(
                f"velocity grid {v.grid.point_shape} vs operator grid {self.grid.point_shape}"
            )
        self.applications += 1
        return CellField(self.grid, apply_with_layers(v.components, self.top, self.bottom))

    def adjoint(self, d: CellField) -> AdjointResult:
        if d.values.shape != self.grid.cell_shape:
            raise GridMismatchError(
                f"cell field shape {d.values.shape} vs operator cells {self.grid.cell_shape}"
            )
        self.adjoint_applications += 1
        return adjoint_with_layers(self.grid, d.values, self.top, self.bottom, self.table)


@dataclass(frozen=True)
class AdjointSuiteResult:
    trials: int
    max_adjoint_defect: float
    max_kappa_defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_adjoint_defect <= self.tol and self.max_kappa_defect <= self.tol


def random_grid(rng: np.random.Generator) -> GridSpec:
    max_i, max_j, max_k = ADJOINT_CHECK_MAX_AXES
    return GridSpec(
        I=int(rng.integers(1, max_i + 1)),
        J=int(rng.integers(1, max_j + 1)),
        K=int(rng.integers(1, max_k + 1)),
        L=int(rng.integers(2, ADJOINT_CHECK_MAX_LEVELS + 1)),
        delta=float(rng.uniform(0.5, 3.0)),
        delta_t=float(rng.uniform(0.1, 1.0)),
    )


def run_adjoint_suite(trials: int, tol: float, seed: int = 0) -> AdjointSuiteResult:
    """
    Check <Tv, d>_Y = <v, T*d>_X and the kappa identity on random instances.

    Args:
        trials (int): Number of random (grid, rho, v, d) instances
        tol (float): Relative tolerance for both identities
        seed (int): Seed of the random generator

    Returns:
        AdjointSuiteResult: Largest defects seen and the pass verdict
    """
    rng = np.random.default_rng(seed)
    worst_adjoint = 0.0
    worst_kappa = 0.0

    for trial in range(trials):
        grid = random_grid(rng)
        series = SliceTimedSeries(grid, rng.uniform(0.5, 2.0, grid.series_shape))
        operator = AdvectionOperator(series)
        v = VelocityField(grid, rng.standard_normal(grid.velocity_shape))
        d = CellField(grid, rng.standard_normal(grid.cell_shape))

        adjoint_defect = operator.dot_test(v, d)
        kappa_defect = operator.kappa_defect(d)
        worst_adjoint = max(worst_adjoint, adjoint_defect)
        worst_kappa = max(worst_kappa, kappa_defect)
        logger.debug(
            f"trial {trial}: grid {grid.cell_shape}, adjoint defect {adjoint_defect:.2e}, "
            f"kappa defect {kappa_defect:.2e}"
        )

    result = AdjointSuiteResult(trials, worst_adjoint, worst_kappa, tol)
    logger.info(
        f"Adjoint suite: {trials} trials, max adjoint defect {worst_adjoint:.3e}, "
        f"max kappa defect {worst_kappa:.3e}, passed={result.passed}"
    )
    return result
