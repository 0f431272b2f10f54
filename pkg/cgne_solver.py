"""
CGNE Solver

Conjugate gradients on the normal equations T*T v = T*b, started at v = 0
and stopped after a fixed number of iterations. Early stopping is the
regularisation: the data are noisy and no reliable noise estimate exists, so
the residual history is logged and itmax is chosen from it offline.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple
import logging
import math

import pandas as pd

from config import (
    BREAKDOWN_THRESHOLD, CSV_FLOAT_FORMAT, DEFAULT_ITMAX, EARLY_STOP_ON_GROWTH,
    RESIDUAL_GROWTH_FACTOR
)
from core_model import (
    CellField, NonFiniteValueError, SolverDivergenceError, VelocityField, inner_y, norm_y
)
from operators.base_operator import LinearOperatorPair

logger = logging.getLogger(__name__)


@dataclass
class SolveReport:
    """
    Result of one CGNE run.

    residuals holds (iteration, ||b - T v_it||_Y) for it = 0..iterations_run.
    """

    v: VelocityField
    residuals: List[Tuple[int, float]] = field(default_factory=list)
    iterations_run: int = 0
    breakdown: bool = False
    stopped_on_growth: bool = False

    @property
    def final_residual(self) -> float:
        return self.residuals[-1][1]

    def residual_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.residuals, columns=['iter', 'residual'])

    def write_residual_csv(self, path: str) -> None:
        """Write the residual log as CSV with header iter,residual."""
        try:
            self.residual_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
            logger.info(f"Wrote residual log ({len(self.residuals)} rows) to {path}")
        except Exception as e:
            logger.error(f"Error writing residual log to {path}: {e}")
            raise


def _require_finite(name: str, value: float, iteration: int) -> float:
    if not math.isfinite(value):
        raise SolverDivergenceError(f"{name} became {value} at iteration {iteration}")
    return value


def run_cgne(op: LinearOperatorPair, b: CellField, itmax: int = DEFAULT_ITMAX,
             stop_on_growth: bool = EARLY_STOP_ON_GROWTH,
             growth_factor: float = RESIDUAL_GROWTH_FACTOR,
             breakdown_threshold: float = BREAKDOWN_THRESHOLD,
             callback: Optional[Callable[[int, VelocityField], None]] = None) -> SolveReport:
    """
    Run CGNE on T v = b.

    Args:
        op (LinearOperatorPair): T and its adjoint
        b (CellField): Right-hand side
        itmax (int): Number of iterations to run (>= 0)
        stop_on_growth (bool): Halt once the residual grows by more than growth_factor
        growth_factor (float): Allowed residual ratio between two iterations
        breakdown_threshold (float): <q, q>_Y below this ends the iteration
        callback (Callable, optional): Called as callback(it, v) after every iteration

    Returns:
        SolveReport: Final iterate and residual history

    Raises:
        ValueError: If itmax is negative
        SolverDivergenceError: If a non-finite value appears
    """
    if itmax < 0:
        raise ValueError(f"itmax must be >= 0, got {itmax}")

    v = VelocityField.zeros(b.grid)
    d = b
    report = SolveReport(v=v, residuals=[(0, norm_y(d))])
    logger.info(f"Starting CGNE: itmax={itmax}, ||b||={report.final_residual:.6e}")

    gamma = 0.0
    p: Optional[VelocityField] = None
    it = 0
    while it < itmax:
        try:
            adjoint = op.adjoint(d)
            kappa = _require_finite('kappa', adjoint.norm_sq, it + 1)
            if it == 0:
                p = adjoint.w
            else:
                if gamma == 0.0:
                    report.breakdown = True
                    break
                beta = kappa / gamma
                p = adjoint.w + beta * p
            gamma = kappa

            q = op.apply(p)
            qq = _require_finite('<q, q>', inner_y(q, q), it + 1)
            if qq < breakdown_threshold:
                logger.warning(f"CGNE breakdown at iteration {it + 1}: <q, q> = {qq:.3e}")
                report.breakdown = True
                break

            alpha = _require_finite('alpha', gamma / qq, it + 1)
            v = v + alpha * p
            d = d - alpha * q
        except NonFiniteValueError as e:
            logger.error(f"Non-finite intermediate at iteration {it + 1}: {e}")
            raise SolverDivergenceError(f"non-finite intermediate at iteration {it + 1}: {e}") from e

        it += 1
        previous = report.final_residual
        residual = norm_y(d)
        report.v = v
        report.iterations_run = it
        report.residuals.append((it, residual))
        logger.debug(f"CGNE iteration {it}: residual {residual:.6e}, alpha {alpha:.3e}")

        if callback is not None:
            callback(it, v)

        if stop_on_growth and residual > growth_factor * previous:
            logger.warning(
                f"Residual grew from {previous:.3e} to {residual:.3e} at iteration {it}, stopping"
            )
            report.stopped_on_growth = True
            break

    logger.info(
        f"CGNE finished after {report.iterations_run} iterations, "
        f"residual {report.final_residual:.6e}"
    )
    return report
