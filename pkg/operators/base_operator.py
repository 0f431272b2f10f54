"""
Base Operator Class

Every linear operator handed to the CGNE solver inherits from this base
class, so the matrix-free production operator and dense test oracles run
through identical solver code.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import logging

from core_model import CellField, VelocityField, inner_x, inner_y, norm_y

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdjointResult:
    """
    Output of the adjoint application.

    w is T*d (already scaled by delta^2), kappa the accumulated e.w sum and
    norm_sq = delta^2 * kappa = <T*d, T*d>_X.
    """

    w: VelocityField
    kappa: float
    norm_sq: float


class LinearOperatorPair(ABC):
    """
    Abstract pair (T, T*) between the velocity space X and the cell space Y.

    Subclasses implement apply() and adjoint(); adjoint must be the true
    adjoint of apply with respect to inner_x and inner_y.
    """

    def __init__(self, name: str):
        """
        Initialize base operator.

        Args:
            name (str): Operator name used in log messages
        """
        self.name = name
        self.applications = 0
        self.adjoint_applications = 0

        logger.debug(f"Initialized operator {self.name}")

    @abstractmethod
    def apply(self, v: VelocityField) -> CellField:
        """
        Compute T v (must be implemented by subclasses).

        Args:
            v (VelocityField): Velocity coefficients

        Returns:
            CellField: T v
        """
        pass

    @abstractmethod
    def adjoint(self, d: CellField) -> AdjointResult:
        """
        Compute T* d together with kappa (must be implemented by subclasses).

        Args:
            d (CellField): Cell residual

        Returns:
            AdjointResult: T* d, kappa and <T*d, T*d>_X
        """
        pass

    def dot_test(self, v: VelocityField, d: CellField) -> float:
        """
        Relative defect of the adjoint identity <T v, d>_Y = <v, T* d>_X.

        Returns:
            float: |<Tv, d> - <v, T*d>| / (||Tv|| ||d||), 0 when either norm vanishes
        """
        tv = self.apply(v)
        lhs = inner_y(tv, d)
        rhs = inner_x(v, self.adjoint(d).w)
        scale = norm_y(tv) * norm_y(d)
        if scale == 0.0:
            return abs(lhs - rhs)
        return abs(lhs - rhs) / scale

    def kappa_defect(self, d: CellField) -> float:
        """Relative mismatch between delta^2 kappa and a recomputed <T*d, T*d>_X."""
        result = self.adjoint(d)
        direct = inner_x(result.w, result.w)
        if direct == 0.0:
            return abs(result.norm_sq)
        return abs(result.norm_sq - direct) / direct

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"
