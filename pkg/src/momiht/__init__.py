"""Momentum iterative hard thresholding for structured recovery.

Solvers for sparsity-, group-sparsity- and rank-constrained least squares
(plus logistic loss), the two-state linear-system convergence analysis that
goes with them, reproducible synthetic benchmarks, scikit-learn estimators
and a CLI.
"""

from .analysis import (
    BoundReport,
    ContractionSystem,
    RipConstants,
    contraction_matrix,
    error_bound,
    estimate_rip,
    geometric_sum,
    iteration_bound,
    matrix_power,
    optimal_mu,
    rip_exact,
    rip_surrogate,
    tau_range,
    xi_of,
)
from .estimators import IHTRegressor, LowRankCompleter
from .models import (
    BlockSparsity,
    LowRank,
    Sparsity,
    active_support,
    project,
    restrict,
    support_of,
    union,
)
from .objectives import LeastSquares, LogisticL2, MaskedLeastSquares, gradient_restricted
from .problems import (
    MetricsReport,
    ProblemInstance,
    evaluate,
    gen_ar1,
    gen_iid_gaussian,
    gen_matrix_completion,
    support_auc,
)
from .solvers import (
    SolverConfig,
    SolverTrace,
    acc_iht,
    debias,
    iht,
    line_search_tau,
    support_expansion,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ContractionSystem",
    "RipConstants",
    "contraction_matrix",
    "error_bound",
    "estimate_rip",
    "geometric_sum",
    "iteration_bound",
    "matrix_power",
    "optimal_mu",
    "rip_exact",
    "rip_surrogate",
    "tau_range",
    "xi_of",
    "IHTRegressor",
    "LowRankCompleter",
    "BlockSparsity",
    "LowRank",
    "Sparsity",
    "active_support",
    "project",
    "restrict",
    "support_of",
    "union",
    "LeastSquares",
    "LogisticL2",
    "MaskedLeastSquares",
    "gradient_restricted",
    "MetricsReport",
    "ProblemInstance",
    "evaluate",
    "gen_ar1",
    "gen_iid_gaussian",
    "gen_matrix_completion",
    "support_auc",
    "SolverConfig",
    "SolverTrace",
    "acc_iht",
    "debias",
    "iht",
    "line_search_tau",
    "support_expansion",
]
