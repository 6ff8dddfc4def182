"""Sparse additive lag-1 models for nonlinear causal discovery in time series."""

from .exceptions import InputError, InstabilityError, ParseError, SolverError, TsSpamError
from .evaluation import best_f1, f1_curve, forward_cv, prediction_mse, precision_recall_f1
from .model import (
    CausalGraph,
    Edge,
    FitConfig,
    TsSpamFit,
    fit_all,
    fit_target,
    function_l2,
    oracle_fit,
    oracle_solution,
    reconstruct_function,
    top_k_parents,
)
from .objective import Coefficients, kkt_residual, objective_value, restricted_eigs
from .penalty import PenaltyKind, PenaltyParams
from .pista import PistaConfig, SolutionPath, group_soft_threshold, ista_solve, pista_solve, theoretical_lambda
from .spline_basis import BSplineBasis, GroupedDesign, KnotVector, build_design, build_uniform_knots, eval_basis
from .synth import GroundTruth, SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "BSplineBasis",
    "CausalGraph",
    "Coefficients",
    "Edge",
    "FitConfig",
    "GroundTruth",
    "GroupedDesign",
    "InputError",
    "InstabilityError",
    "KnotVector",
    "ParseError",
    "PenaltyKind",
    "PenaltyParams",
    "PistaConfig",
    "SolutionPath",
    "SolverError",
    "SynthConfig",
    "TsSpamError",
    "TsSpamFit",
    "best_f1",
    "build_design",
    "build_uniform_knots",
    "eval_basis",
    "f1_curve",
    "fit_all",
    "fit_target",
    "forward_cv",
    "function_l2",
    "generate",
    "group_soft_threshold",
    "ista_solve",
    "kkt_residual",
    "objective_value",
    "oracle_fit",
    "oracle_solution",
    "pista_solve",
    "precision_recall_f1",
    "prediction_mse",
    "reconstruct_function",
    "restricted_eigs",
    "theoretical_lambda",
    "top_k_parents",
]
