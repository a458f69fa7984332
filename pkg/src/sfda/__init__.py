"""Sparse Fisher discriminant analysis with thresholded linear constraints."""

from .classify import (OptimalRuleSpec, classify, classify_batch,
                       discriminant_matrix, gram_matrix, optimal_classify,
                       optimal_classify_batch, two_class_error)
from .diagnostics import (TheoryContext, build_theory,
                          conditional_error_two_class, consistency_experiment,
                          gaussian_block_generator, optimality_gap_experiment,
                          projection_distance, rate_scale)
from .errors import (ConvergenceError, DegenerateProblemError, DivisorError,
                     SfdaError, ValidationError)
from .estimators import (ClassSummaries, LabeledDataset, center_overall,
                         summarize)
from .features import (MultichannelRecord, WaveletFamily, dwt64, featurize,
                       inverse_wavelet_transform, spectrum, wavelet_transform)
from .model import (DiscriminantModel, FitParams, Variant, first_component,
                    fit, fit_from_summaries, next_component,
                    threshold_constraint)
from .model_selection import TuningGrid, cross_validate, stratified_folds
from .simulate import (SimModel, SimScenario, SimTruth, misclassification_rate,
                       simulate)
from .solver import (ConstraintSet, InitStrategy, PenaltySpec, RayleighResult,
                     SolverConfig, maximize_rayleigh, penalty_norm_sq,
                     prox_sq_l1, q_form, solve_linear_max)

__version__ = "0.1.0"

__all__ = [
    "ClassSummaries", "ConstraintSet", "ConvergenceError",
    "DegenerateProblemError", "DiscriminantModel", "DivisorError", "FitParams",
    "InitStrategy", "LabeledDataset", "MultichannelRecord", "OptimalRuleSpec",
    "PenaltySpec", "RayleighResult", "SfdaError", "SimModel", "SimScenario",
    "SimTruth", "SolverConfig", "TheoryContext", "TuningGrid",
    "ValidationError", "Variant", "WaveletFamily", "build_theory",
    "center_overall", "classify", "classify_batch",
    "conditional_error_two_class", "consistency_experiment", "cross_validate",
    "discriminant_matrix", "dwt64", "featurize", "first_component", "fit",
    "fit_from_summaries", "gaussian_block_generator", "gram_matrix",
    "inverse_wavelet_transform", "maximize_rayleigh", "misclassification_rate",
    "next_component", "optimal_classify", "optimal_classify_batch",
    "optimality_gap_experiment", "projection_distance",
    "penalty_norm_sq", "prox_sq_l1", "q_form", "rate_scale", "simulate",
    "solve_linear_max", "spectrum", "stratified_folds", "summarize",
    "threshold_constraint", "two_class_error", "wavelet_transform",
]
