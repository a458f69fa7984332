"""Cross-validation over the tuning grids for (tau, lambda, kappa-factor).

Stratified seeded folding, exhaustive grid search, deterministic tie
breaking toward sparser models (larger tau, then lambda, then kappa factor).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .classify import classify_batch
from .errors import SfdaError, ValidationError
from .estimators import LabeledDataset, summarize
from .model import FitParams, Variant, fit_from_summaries
from .simulate import misclassification_rate
from .solver import PenaltySpec, SolverConfig

DEFAULT_TAUS = (0.5, 1.0, 5.0, 10.0)
DEFAULT_LAMBDAS = (0.01, 0.05, 0.1, 0.2, 0.3, 0.4)
DEFAULT_KAPPA_FACTORS = (0.0, 0.001, 0.01)


@dataclass(frozen=True)
class TuningGrid:
    taus: tuple = DEFAULT_TAUS
    lambdas: tuple = DEFAULT_LAMBDAS
    kappa_factors: tuple = DEFAULT_KAPPA_FACTORS
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if any(t < 0 for t in self.taus):
            raise ValidationError("all tau values must be nonnegative")
        if any(not 0 <= l <= 1 for l in self.lambdas):
            raise ValidationError("all lambda values must lie in [0, 1]")
        if any(f < 0 for f in self.kappa_factors):
            raise ValidationError("all kappa factors must be nonnegative")
        if self.folds < 2:
            raise ValidationError("need at least 2 folds")
        if not (self.taus and self.lambdas and self.kappa_factors):
            raise ValidationError("grid axes must be nonempty")


def stratified_folds(labels: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Fold index (0..n_folds-1) per observation, class-balanced.

    Within each class the shuffled members are dealt round-robin, so fold
    class proportions differ from the global ones by at most one observation
    per class.  Deterministic given the seed.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(5,)))
    assignment = np.empty(labels.shape[0], dtype=int)
    for cls in np.unique(labels):
        members = np.nonzero(labels == cls)[0]
        if members.size < n_folds:
            raise ValidationError(
                f"class {cls} has {members.size} members; too few for "
                f"{n_folds}-fold stratified splitting")
        rng.shuffle(members)
        assignment[members] = np.arange(members.size) % n_folds
    return assignment


@dataclass
class CvCell:
    tau: float
    lam: float
    kappa_factor: float
    mean_error: float
    sd_error: float
    fold_errors: list = field(default_factory=list)
    failures: int = 0


def cross_validate(data: LabeledDataset, grid: TuningGrid,
                   variant: Variant = Variant.THRESHOLDED,
                   solver: SolverConfig | None = None):
    """Exhaustive grid search by stratified k-fold misclassification.

    Returns (best FitParams, cv_table) where cv_table lists one CvCell per
    grid point in configuration order.  A fit failure on a fold counts as
    error 1.0 for that cell, disqualifying the grid point without aborting
    the search.  Exact ties on the mean error go to the larger
    (tau, lambda, kappa_factor), preferring sparser models.
    """
    solver = solver if solver is not None else SolverConfig()
    assignment = stratified_folds(data.labels, grid.folds, grid.seed)
    factors = grid.kappa_factors if variant is Variant.THRESHOLDED else (0.0,)
    points = list(itertools.product(grid.taus, grid.lambdas, factors))

    fold_context = []
    for fold in range(grid.folds):
        train_rows = assignment != fold
        train = LabeledDataset(data.observations[train_rows],
                               data.labels[train_rows], data.n_classes)
        val_obs = data.observations[~train_rows]
        val_labels = data.labels[~train_rows]
        summaries = summarize(train)
        quad_eig = scipy.linalg.eigh(summaries.within_cov)
        fold_context.append((summaries, quad_eig, val_obs, val_labels))

    table = []
    for tau, lam, factor in points:
        params = FitParams(penalty=PenaltySpec(tau, lam), kappa_factor=factor,
                           variant=variant, solver=solver)
        errors = []
        failures = 0
        for summaries, quad_eig, val_obs, val_labels in fold_context:
            try:
                model = fit_from_summaries(summaries, params, quad_eig=quad_eig)
                pred = classify_batch(model, val_obs)
                errors.append(misclassification_rate(pred, val_labels))
            except SfdaError:
                failures += 1
                errors.append(1.0)
        mean = float(np.mean(errors))
        sd = float(np.std(errors, ddof=1)) if len(errors) > 1 else 0.0
        table.append(CvCell(tau=tau, lam=lam, kappa_factor=factor,
                            mean_error=mean, sd_error=sd,
                            fold_errors=errors, failures=failures))

    best = None
    for cell in table:
        if best is None or cell.mean_error < best.mean_error:
            best = cell
        elif cell.mean_error == best.mean_error:
            if ((cell.tau, cell.lam, cell.kappa_factor)
                    > (best.tau, best.lam, best.kappa_factor)):
                best = cell
    best_params = FitParams(penalty=PenaltySpec(best.tau, best.lam),
                            kappa_factor=best.kappa_factor, variant=variant,
                            solver=solver)
    return best_params, table
