"""Sample moments for labeled multiclass data.

Computes per-class means, the overall mean, the pooled within-class
covariance (divisor n - K) and the between-class covariance (divisor n)
from a labeled dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisorError, ValidationError

SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class LabeledDataset:
    """n observations (rows) with integer class labels in 1..n_classes.

    Every class must appear at least once and all entries must be finite.
    """

    observations: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        labels = np.asarray(self.labels)
        if obs.ndim != 2:
            raise ValidationError("observations must be a 2-d array (rows = observations)")
        if labels.ndim != 1 or labels.shape[0] != obs.shape[0]:
            raise ValidationError("labels must be a vector with one entry per observation")
        if not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(np.int64)
            if not np.array_equal(as_int, labels):
                raise ValidationError("labels must be integers")
            labels = as_int
        if self.n_classes < 1:
            raise ValidationError("n_classes must be positive")
        if not np.isfinite(obs).all():
            raise ValidationError("observations contain non-finite entries")
        if labels.min(initial=1) < 1 or labels.max(initial=1) > self.n_classes:
            raise ValidationError("labels must lie in 1..n_classes")
        counts = np.bincount(labels, minlength=self.n_classes + 1)[1:]
        missing = np.nonzero(counts == 0)[0]
        if missing.size:
            raise ValidationError(f"class {missing[0] + 1} has no observations")
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def p(self) -> int:
        return self.observations.shape[1]


@dataclass(frozen=True)
class ClassSummaries:
    """Per-class means, counts, overall mean and the two covariance estimates."""

    class_means: np.ndarray   # (K, p)
    counts: np.ndarray        # (K,)
    overall_mean: np.ndarray  # (p,)
    within_cov: np.ndarray    # (p, p), divisor n - K
    between_cov: np.ndarray   # (p, p), divisor n

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.class_means.shape[0]

    @property
    def p(self) -> int:
        return self.class_means.shape[1]

    def between_factor(self) -> np.ndarray:
        """(K, p) matrix W with between_cov == W.T @ W (up to symmetrization).

        Row i is sqrt(n_i / n) * (mean_i - overall_mean); useful for cheap
        matrix-vector products with the low-rank between-class covariance.
        """
        weights = np.sqrt(self.counts / self.n)
        return weights[:, None] * (self.class_means - self.overall_mean)


def summarize(data: LabeledDataset) -> ClassSummaries:
    """Compute class means, overall mean and both covariance matrices.

    The within-class covariance pools squared deviations about the class
    means with divisor n - K; the between-class covariance weights squared
    deviations of class means about the overall mean by n_i / n.
    """
    n, p = data.n, data.p
    k = data.n_classes
    if n <= k:
        raise DivisorError(f"n = {n} observations with {k} classes leaves no degrees "
                           "of freedom for the pooled covariance (need n > K)")
    counts = np.bincount(data.labels, minlength=k + 1)[1:].astype(float)
    class_means = np.zeros((k, p))
    np.add.at(class_means, data.labels - 1, data.observations)
    class_means /= counts[:, None]
    overall_mean = (counts @ class_means) / n

    centered = data.observations - class_means[data.labels - 1]
    within = centered.T @ centered / (n - k)
    within = 0.5 * (within + within.T)

    dev = class_means - overall_mean
    between = (dev * counts[:, None]).T @ dev / n
    between = 0.5 * (between + between.T)

    return ClassSummaries(class_means=class_means, counts=counts,
                          overall_mean=overall_mean, within_cov=within,
                          between_cov=between)


def center_overall(data: LabeledDataset) -> LabeledDataset:
    """Shift all observations so the overall sample mean is zero.

    Class structure is unchanged; both covariance estimates are invariant
    under this shift.
    """
    shifted = data.observations - data.observations.mean(axis=0)
    return LabeledDataset(observations=shifted, labels=data.labels,
                          n_classes=data.n_classes)
