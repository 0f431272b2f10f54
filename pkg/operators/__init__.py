"""
Linear Operators Package

The forward operator T, its adjoint T* with respect to the H1-like inner
product on X, and the operator-pair interface consumed by the CGNE solver.
"""

from .base_operator import AdjointResult, LinearOperatorPair
from .forward import CornerStencil, apply_T, assemble_rhs, corner_sum_D, flux_sums
from .adjoint import MinorTable, apply_T_star, line_solve, minor_sequence
from .advection_operator import AdjointSuiteResult, AdvectionOperator, run_adjoint_suite

__all__ = [
    'AdjointResult',
    'LinearOperatorPair',
    'CornerStencil',
    'apply_T',
    'assemble_rhs',
    'corner_sum_D',
    'flux_sums',
    'MinorTable',
    'apply_T_star',
    'line_solve',
    'minor_sequence',
    'AdjointSuiteResult',
    'AdvectionOperator',
    'run_adjoint_suite',
]
