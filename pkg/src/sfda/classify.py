"""Classification rules and their error formulas.

The fitted rule assigns x to the class minimizing (x - m_i)' D (x - m_i)
where D combines the components with the inverse gram matrix of their
within-covariance inner products.  The known-parameter optimal rule and the
closed-form two-class error serve as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import ndtr

from .errors import DegenerateProblemError, ValidationError

CONDITION_LIMIT = 1e12


def gram_matrix(components: np.ndarray, sigma_hat: np.ndarray) -> np.ndarray:
    """Matrix of pairwise within-covariance inner products of the components."""
    components = np.atleast_2d(np.asarray(components, dtype=float))
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    if components.shape[1] != sigma_hat.shape[0]:
        raise ValidationError("component length must match covariance dimension")
    gram = components @ sigma_hat @ components.T
    return 0.5 * (gram + gram.T)


def discriminant_matrix(components: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """A' G^{-1} A for component rows A and gram matrix G; symmetric PSD.

    Raises when the gram matrix is numerically singular (condition number
    above 1e12), which signals nearly dependent components.
    """
    components = np.atleast_2d(np.asarray(components, dtype=float))
    gram = np.atleast_2d(np.asarray(gram, dtype=float))
    evals = scipy.linalg.eigvalsh(gram)
    if evals[0] <= 0 or evals[-1] / evals[0] > CONDITION_LIMIT:
        condition = np.inf if evals[0] <= 0 else evals[-1] / evals[0]
        raise DegenerateProblemError(
            "gram matrix is numerically singular; components are nearly "
            f"dependent (condition ~ {condition:.2e})", condition=condition)
    solved = scipy.linalg.solve(gram, components, assume_a="pos")
    disc = components.T @ solved
    return 0.5 * (disc + disc.T)


def _mahalanobis_to_means(points, means, metric_chol):
    """Squared distances (n, K) of each point to each mean, in the given metric."""
    dists = np.empty((points.shape[0], means.shape[0]))
    for i, mean in enumerate(means):
        diff = points - mean
        solved = scipy.linalg.cho_solve(metric_chol, diff.T)
        dists[:, i] = np.einsum("ij,ji->i", diff, solved)
    return dists


def classify_batch(model, points: np.ndarray) -> np.ndarray:
    """Predicted class labels (1-based) for each row of ``points``.

    Works in the component projection: with A the component rows and G their
    gram matrix, (x - m_i)' A'G^{-1}A (x - m_i) equals the distance between
    the projections Ax and Am_i in the G^{-1} metric.  Ties go to the lowest
    class index.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.isfinite(points).all():
        raise ValidationError("points contain non-finite entries")
    if points.shape[1] != model.p:
        raise ValidationError(f"points must have {model.p} columns")
    comp = model.components
    try:
        chol = scipy.linalg.cho_factor(model.gram)
    except scipy.linalg.LinAlgError as exc:
        raise DegenerateProblemError("gram matrix is not positive definite") from exc
    projected = points @ comp.T
    mean_proj = model.summaries.class_means @ comp.T
    dists = _mahalanobis_to_means(projected, mean_proj, chol)
    return np.argmin(dists, axis=1) + 1


def classify(model, x: np.ndarray) -> int:
    """Predicted class label (1-based) for a single observation."""
    return int(classify_batch(model, np.asarray(x, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class OptimalRuleSpec:
    """Known population parameters for the oracle classification rule."""

    true_means: np.ndarray   # (K, p)
    true_cov: np.ndarray     # (p, p), positive definite
    true_d: np.ndarray | None = None  # sum of outer products of true components

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.true_means, dtype=float))
        cov = np.asarray(self.true_cov, dtype=float)
        if cov.shape != (means.shape[1], means.shape[1]):
            raise ValidationError("covariance shape must match mean dimension")
        object.__setattr__(self, "true_means", means)
        object.__setattr__(self, "true_cov", cov)

    @property
    def n_classes(self) -> int:
        return self.true_means.shape[0]


def optimal_classify_batch(spec: OptimalRuleSpec, points: np.ndarray) -> np.ndarray:
    """Bayes rule labels under equal priors: argmin of (x-mu_i)' Sigma^{-1} (x-mu_i)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    try:
        chol = scipy.linalg.cho_factor(spec.true_cov)
    except scipy.linalg.LinAlgError as exc:
        raise ValidationError("true covariance must be positive definite") from exc
    dists = _mahalanobis_to_means(points, spec.true_means, chol)
    return np.argmin(dists, axis=1) + 1


def optimal_classify(spec: OptimalRuleSpec, x: np.ndarray) -> int:
    return int(optimal_classify_batch(spec, np.asarray(x, dtype=float)[None, :])[0])


def discriminant_classify_batch(means: np.ndarray, metric: np.ndarray,
                                points: np.ndarray) -> np.ndarray:
    """argmin_i (x - m_i)' M (x - m_i) for an explicit PSD metric M."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    means = np.atleast_2d(np.asarray(means, dtype=float))
    dists = np.empty((points.shape[0], means.shape[0]))
    for i, mean in enumerate(means):
        diff = points - mean
        dists[:, i] = np.einsum("ij,jk,ik->i", diff, metric, diff)
    return np.argmin(dists, axis=1) + 1


def two_class_error(delta: np.ndarray, d_matrix: np.ndarray,
                    sigma: np.ndarray) -> float:
    """Misclassification rate Phi(-d'Dd / (2 ||d'D Sigma^{1/2}||_2)) of the
    two-class rule with metric D, mean difference delta and common covariance
    Sigma."""
    delta = np.asarray(delta, dtype=float)
    if not delta.any():
        raise ValidationError("delta must be nonzero")
    u = np.asarray(d_matrix, dtype=float) @ delta
    numerator = float(delta @ u)
    denom_sq = float(u @ np.asarray(sigma, dtype=float) @ u)
    if denom_sq <= 0:
        raise ValidationError("denominator d'D Sigma D d is zero")
    return float(ndtr(-numerator / (2.0 * np.sqrt(denom_sq))))
