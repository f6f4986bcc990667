"""Nonparametric regression in metric spaces via Lipschitz-smoothest fits.

Fitting sparsifies the pairwise smoothness constraints with a low-stretch
spanner, solves the resulting non-negative program, and selects a Lipschitz
stratum by balancing empirical risk against a fat-shattering penalty.
Prediction extends the fitted sample values to new points with an
approximate minimum-Lipschitz extension backed by per-bucket nearest
neighbor indexes.
"""

from .ann import AnnIndex, build_index
from .bounds import (
    BoundParams,
    RiskReport,
    deviation_prob_bound,
    fat_dim_bound,
    invert_eps,
    stratified_penalty,
    total_bound,
)
from .errors import BudgetExhaustedError, DataError, InvalidMetricError
from .experiment import ExperimentConfig, ExperimentResult, run_consistency_experiment
from .extension import Predictor, build_predictor, exact_extension, extension_value
from .metric import (
    Dataset,
    NetHierarchy,
    build_hierarchy,
    build_net,
    estimate_ddim,
    normalize_diameter,
    packing_bound,
)
from .pcsolver import PackingCoveringProgram, SolverOutcome, solve
from .spanner import SpannerGraph, build_spanner
from .srm import (
    Hypothesis,
    build_erm_program,
    empirical_risk,
    search_L,
    search_r,
    smooth_certificate,
    solve_erm,
)

__version__ = "0.1.0"

__all__ = [
    "AnnIndex",
    "BoundParams",
    "BudgetExhaustedError",
    "DataError",
    "Dataset",
    "ExperimentConfig",
    "ExperimentResult",
    "Hypothesis",
    "InvalidMetricError",
    "NetHierarchy",
    "PackingCoveringProgram",
    "Predictor",
    "RiskReport",
    "SolverOutcome",
    "SpannerGraph",
    "build_erm_program",
    "build_hierarchy",
    "build_index",
    "build_net",
    "build_predictor",
    "build_spanner",
    "deviation_prob_bound",
    "empirical_risk",
    "estimate_ddim",
    "exact_extension",
    "extension_value",
    "fat_dim_bound",
    "invert_eps",
    "normalize_diameter",
    "packing_bound",
    "run_consistency_experiment",
    "search_L",
    "search_r",
    "smooth_certificate",
    "solve",
    "solve_erm",
    "stratified_penalty",
    "total_bound",
]
