"""Simple reference classifiers used as benchmark sanity anchors."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .classify import _mahalanobis_to_means
from .estimators import ClassSummaries


def nearest_centroid_predict(summaries: ClassSummaries,
                             points: np.ndarray) -> np.ndarray:
    """Assign each row to the class with the closest mean in Euclidean distance."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    diffs = points[:, None, :] - summaries.class_means[None, :, :]
    dists = np.einsum("nkp,nkp->nk", diffs, diffs)
    return np.argmin(dists, axis=1) + 1


def ridge_lda_predict(summaries: ClassSummaries, points: np.ndarray,
                      ridge: float | None = None) -> np.ndarray:
    """Mahalanobis rule under the ridge-stabilized pooled covariance.

    The default ridge is the average eigenvalue trace(S)/p, a fixed
    (untuned) scale-aware choice.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cov = summaries.within_cov
    p = cov.shape[0]
    if ridge is None:
        ridge = float(np.trace(cov)) / p
    chol = scipy.linalg.cho_factor(cov + ridge * np.eye(p))
    dists = _mahalanobis_to_means(points, summaries.class_means, chol)
    return np.argmin(dists, axis=1) + 1
