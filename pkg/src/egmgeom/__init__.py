"""Excessive-gap solvers for minimum enclosing balls and polytopes."""
from .applications import (MarginResult, PolytopeDistanceResult, max_margin,
                           polytope_distance, two_polytope_distance)
from .baselines import bc_coreset_meb, dense_qp_oracle, exact_meb_small, minnorm_oracle
from .bench import BenchConfig, gen_gaussian, run_bench
from .engine import StoppingRule, run
from .errors import (EgmGeomError, GapViolationError, InfeasibleError, InsufficientPointsError,
                     InvalidInputError, NumericalFailureError, SizeLimitError, TooLargeError)
from .geometry import (Ball, LabeledDataset, PointSet, PolytopeFit, PolytopeShape,
                       SimplexVector, data_radius, pair_lower_bound)
from .mecp import mecp_primal, solve_mecp
from .meb import (meb_dual, meb_dual_gradient, meb_primal, solve_meb_additive,
                  solve_meb_multiplicative)
from .qp import BACKEND as QP_BACKEND
from .qp import DiagQpInstance, project_scaled_simplex, solve_diag_qp

__version__ = "0.1.0"

__all__ = [
    "Ball", "BenchConfig", "DiagQpInstance", "EgmGeomError", "GapViolationError",
    "InfeasibleError", "InsufficientPointsError", "InvalidInputError", "LabeledDataset",
    "MarginResult", "NumericalFailureError", "PointSet", "PolytopeDistanceResult",
    "PolytopeFit", "PolytopeShape", "QP_BACKEND", "SimplexVector", "SizeLimitError",
    "StoppingRule", "TooLargeError", "bc_coreset_meb", "data_radius", "dense_qp_oracle",
    "exact_meb_small", "gen_gaussian", "max_margin", "meb_dual", "meb_dual_gradient",
    "meb_primal", "mecp_primal", "minnorm_oracle", "pair_lower_bound",
    "polytope_distance", "project_scaled_simplex", "run", "run_bench", "solve_diag_qp",
    "solve_meb_additive", "solve_meb_multiplicative", "solve_mecp",
    "two_polytope_distance",
]
