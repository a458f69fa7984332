"""Sequential extraction of sparse discriminant components.

Fits K-1 components: the first maximizes the between-class quadratic form
under the penalized within-class constraint; each later component additionally
satisfies equality constraints against soft-thresholded (or raw) images of the
earlier components under the between-class covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .classify import discriminant_matrix, gram_matrix
from .errors import DegenerateProblemError, ValidationError
from .estimators import ClassSummaries, LabeledDataset, summarize
from .solver import (ConstraintSet, PenaltySpec, SolverConfig, SplitWorkspace,
                     maximize_rayleigh)


class Variant(Enum):
    THRESHOLDED = "thresholded"
    UNTHRESHOLDED = "unthresholded"


@dataclass(frozen=True)
class FitParams:
    """Penalty, thresholding and solver settings for one fit.

    ``kappa`` is the absolute soft-threshold level shared by all constraint
    vectors.  If ``kappa_factor`` is set it takes precedence and the level
    becomes ``kappa_factor * ||B a_j||_1`` per component, which is how the
    cross-validation grid parameterizes it.  Both are ignored for the
    unthresholded variant.  ``n_components`` caps the number of extracted
    components (default: all K - 1).
    """

    penalty: PenaltySpec
    kappa: float = 0.0
    kappa_factor: float | None = None
    variant: Variant = Variant.THRESHOLDED
    solver: SolverConfig = field(default_factory=SolverConfig)
    n_components: int | None = None

    def __post_init__(self):
        if not np.isfinite(self.kappa) or self.kappa < 0:
            raise ValidationError("kappa must be finite and nonnegative")
        if self.kappa_factor is not None and self.kappa_factor < 0:
            raise ValidationError("kappa_factor must be nonnegative")
        if self.n_components is not None and self.n_components < 1:
            raise ValidationError("n_components must be at least 1")


@dataclass
class DiscriminantModel:
    """Fitted components plus everything needed to classify.

    ``components`` has K-1 rows; ``constraints`` the K-2 constraint vectors
    used for components 2..K-1 (empty when K = 2); ``gram`` is the (K-1) x
    (K-1) matrix of within-covariance inner products of the components and
    ``discriminant`` the p x p matrix defining the classification metric.
    """

    components: np.ndarray
    constraints: np.ndarray
    summaries: ClassSummaries
    gram: np.ndarray
    discriminant: np.ndarray
    params: FitParams

    @property
    def p(self) -> int:
        return self.components.shape[1]

    @property
    def n_classes(self) -> int:
        return self.summaries.n_classes


def soft_threshold(v: np.ndarray, level: float) -> np.ndarray:
    """Coordinate-wise sign(v) * max(|v| - level, 0)."""
    return np.sign(v) * np.maximum(np.abs(v) - level, 0.0)


def threshold_constraint(b_hat: np.ndarray, alpha_j: np.ndarray,
                         kappa: float) -> np.ndarray:
    """Soft-threshold B a_j at level kappa / 2.

    Closed-form minimizer of ||xi - B a_j||_2^2 + kappa * ||xi||_1 over xi.
    """
    if kappa < 0:
        raise ValidationError("kappa must be nonnegative")
    return soft_threshold(np.asarray(b_hat) @ np.asarray(alpha_j), 0.5 * kappa)


def _constraint_matrix(constraints) -> np.ndarray | None:
    if constraints is None or len(constraints) == 0:
        return None
    stack = np.atleast_2d(np.asarray(constraints, dtype=float))
    return stack


def _check_constraint_rank(stack: np.ndarray, component_index: int | None = None):
    norms = np.linalg.norm(stack, axis=1)
    if (norms == 0).any():
        raise DegenerateProblemError(
            "constraint vector is identically zero (threshold level too large)",
            component_index=component_index)
    if np.linalg.matrix_rank(stack) < stack.shape[0]:
        raise DegenerateProblemError(
            "constraint vectors are linearly dependent",
            component_index=component_index)


def _between_init(summaries: ClassSummaries, stack: np.ndarray | None) -> np.ndarray:
    # leading eigenvector of the projected between-class covariance, obtained
    # from its rank-(K-1) factor so no dense p x p eigendecomposition is needed
    factor = summaries.between_factor()
    if stack is not None:
        gram = stack @ stack.T
        coef = scipy.linalg.solve(gram, stack, assume_a="pos")
        factor = factor - (factor @ stack.T) @ coef
    small = factor @ factor.T
    _, vecs = scipy.linalg.eigh(small)
    return factor.T @ vecs[:, -1]


def _component(summaries, params, stack, quad_eig):
    cs = ConstraintSet(quad=summaries.within_cov, penalty=params.penalty,
                       linear=stack)
    ws = SplitWorkspace(cs, quad_eig=quad_eig)
    init = _between_init(summaries, stack)
    result = maximize_rayleigh(summaries.between_cov, cs, params.solver,
                               init_vector=init, workspace=ws)
    return result.alpha


def first_component(summaries: ClassSummaries, params: FitParams) -> np.ndarray:
    """Leading sparse discriminant component (no equality constraints)."""
    if summaries.n_classes < 2:
        raise ValidationError("need at least two classes")
    return _component(summaries, params, None, None)


def next_component(summaries: ClassSummaries, constraints,
                   params: FitParams) -> np.ndarray:
    """Next component, orthogonal to every supplied constraint vector."""
    stack = _constraint_matrix(constraints)
    if stack is None:
        raise ValidationError("next_component requires at least one constraint")
    _check_constraint_rank(stack)
    return _component(summaries, params, stack, None)


def _resolve_kappa(params: FitParams, v: np.ndarray) -> float:
    if params.kappa_factor is not None:
        return params.kappa_factor * float(np.abs(v).sum())
    return params.kappa


def fit_from_summaries(summaries: ClassSummaries, params: FitParams,
                       quad_eig=None) -> DiscriminantModel:
    """Fit all K-1 components from precomputed class summaries.

    ``quad_eig`` optionally supplies the eigendecomposition of the within
    covariance, letting callers (cross-validation in particular) share it
    across many parameter settings on the same data.
    """
    k = summaries.n_classes
    p = summaries.p
    if k < 2:
        raise ValidationError("need at least two classes")
    if quad_eig is None:
        quad_eig = scipy.linalg.eigh(summaries.within_cov)
    between = summaries.between_cov
    n_components = k - 1 if params.n_components is None else min(
        params.n_components, k - 1)

    components = [_component(summaries, params, None, quad_eig)]
    constraint_rows: list[np.ndarray] = []
    for i in range(2, n_components + 1):
        v = between @ components[-1]
        if params.variant is Variant.THRESHOLDED:
            xi = soft_threshold(v, 0.5 * _resolve_kappa(params, v))
        else:
            xi = v
        constraint_rows.append(xi)
        stack = np.vstack(constraint_rows)
        try:
            _check_constraint_rank(stack, component_index=i)
            components.append(_component(summaries, params, stack, quad_eig))
        except DegenerateProblemError as exc:
            if getattr(exc, "component_index", None) is None:
                exc.component_index = i
            raise

    comp = np.vstack(components)
    gram = gram_matrix(comp, summaries.within_cov)
    disc = discriminant_matrix(comp, gram)
    constraints = (np.vstack(constraint_rows) if constraint_rows
                   else np.empty((0, p)))
    return DiscriminantModel(components=comp, constraints=constraints,
                             summaries=summaries, gram=gram,
                             discriminant=disc, params=params)


def fit(data: LabeledDataset, params: FitParams) -> DiscriminantModel:
    """Summarize the data and fit the full sequence of components."""
    return fit_from_summaries(summarize(data), params)
