"""Matrix Muckenhoupt constants and discretized Fock projections."""

from .errors import (CubeOutsideGrid, FockAprError, InvalidSpec,
                     NotLatticePoint, NumericalBreakdown, OverflowGuard,
                     PowerIterationStall, QuadratureUnderResolved,
                     RefinementStalled, RegionTooSmall, SandwichViolated,
                     SeriesDiverging)
from .linalg import HermitianPD, WeightSpec, eval_weight, matrix_power
from .metric import Cube, NormOracle, avg_norm, dual_norm, pointwise_metric
from .reduce import ReducingOperator, reducing_operator
from .apr import AprReport, apr_constant, compare_radii, direct_ratio

__all__ = [
    "AprReport", "Cube", "CubeOutsideGrid", "FockAprError", "HermitianPD",
    "InvalidSpec", "NormOracle", "NotLatticePoint", "NumericalBreakdown",
    "OverflowGuard", "PowerIterationStall", "QuadratureUnderResolved",
    "ReducingOperator", "RefinementStalled", "RegionTooSmall",
    "SandwichViolated", "SeriesDiverging", "WeightSpec", "apr_constant",
    "avg_norm", "compare_radii", "direct_ratio", "dual_norm", "eval_weight",
    "matrix_power", "pointwise_metric", "reducing_operator",
]
