"""Exact theoretical objects at known-parameter scale and trend experiments.

Given a true covariance and true class means, builds the whitened
between-class matrix, its leading eigenpairs, the true discriminant
components and the population discriminant metric; evaluates the two-class
conditional error formula; and runs seeded consistency-trend experiments
used to check that estimation error shrinks with the sample size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import ndtr

from .errors import SfdaError, ValidationError
from .estimators import LabeledDataset
from .model import FitParams, Variant, fit
from .solver import PenaltySpec, SolverConfig

EIGENVALUE_FLOOR = 1e-12
DENSE_DIM_LIMIT = 2000


def rate_scale(n_classes: int, p: int, n: int) -> float:
    """sqrt(K * log(p) / n), the rate at which tuning parameters shrink."""
    return float(np.sqrt(n_classes * np.log(p) / n))


@dataclass
class TheoryContext:
    """Population quantities derived from a true covariance and true means."""

    Sigma: np.ndarray            # (p, p) positive definite
    B: np.ndarray                # (p, p) between-class covariance
    Xi: np.ndarray               # (p, p) whitened between-class matrix
    eigvals: np.ndarray          # (K-1,) leading eigenvalues, descending
    true_components: np.ndarray  # (K-1, p) rows a_k with a_k' Sigma a_k = 1
    gammas: np.ndarray           # (K-1, p) orthonormal rows Sigma^{1/2} a_k
    D: np.ndarray                # (p, p) sum of outer products of components
    Lambda_p: float              # max l1 norm over components and their Sigma images
    means: np.ndarray            # (K, p) centered true means
    sqrt_cov: np.ndarray         # (p, p) symmetric square root of Sigma
    auto_centered: bool = False
    s_n: float | None = None

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]


def _symmetric_sqrt_pair(sigma):
    evals, evecs = scipy.linalg.eigh(sigma)
    if evals[-1] <= 0:
        raise ValidationError("covariance must be positive definite")
    floor = EIGENVALUE_FLOOR * evals[-1]
    if evals[0] <= floor:
        raise ValidationError("covariance is numerically singular")
    evals = np.maximum(evals, floor)
    root = np.sqrt(evals)
    sqrt = (evecs * root) @ evecs.T
    inv_sqrt = (evecs / root) @ evecs.T
    return 0.5 * (sqrt + sqrt.T), 0.5 * (inv_sqrt + inv_sqrt.T)


def build_theory(sigma: np.ndarray, means: np.ndarray,
                 n: int | None = None) -> TheoryContext:
    """Derive eigenstructure, true components and the discriminant metric.

    ``means`` rows are the K class means; they are centered to zero sum (with
    a flag when that actually changed them).  Requires p small enough for a
    dense eigendecomposition.
    """
    sigma = np.asarray(sigma, dtype=float)
    means = np.atleast_2d(np.asarray(means, dtype=float))
    k, p = means.shape
    if sigma.shape != (p, p):
        raise ValidationError("covariance shape must match mean dimension")
    if p > DENSE_DIM_LIMIT:
        raise ValidationError(f"dense eigendecomposition guard: p <= {DENSE_DIM_LIMIT}")
    if k < 2:
        raise ValidationError("need at least two classes")

    offset = means.mean(axis=0)
    scale = max(1.0, np.abs(means).max())
    auto_centered = bool(np.abs(offset).max() > 1e-12 * scale)
    centered = means - offset

    sqrt_cov, inv_sqrt = _symmetric_sqrt_pair(sigma)
    between = centered.T @ centered / k
    xi = inv_sqrt @ between @ inv_sqrt
    xi = 0.5 * (xi + xi.T)
    evals, evecs = scipy.linalg.eigh(xi)
    order = np.argsort(evals)[::-1][: k - 1]
    lead = evals[order]
    if lead[-1] <= EIGENVALUE_FLOOR * max(1.0, abs(lead[0])):
        raise ValidationError(
            f"found only {int((lead > 0).sum())} positive eigenvalues; "
            f"need {k - 1} (identical class means?)")
    gammas = evecs[:, order].T
    for row in gammas:
        idx = int(np.argmax(np.abs(row)))
        if row[idx] < 0:
            row *= -1.0
    components = gammas @ inv_sqrt
    d_matrix = components.T @ components
    sigma_images = components @ sigma
    lambda_p = max(float(np.abs(components).sum(axis=1).max()),
                   float(np.abs(sigma_images).sum(axis=1).max()))
    return TheoryContext(
        Sigma=sigma, B=between, Xi=xi, eigvals=lead,
        true_components=components, gammas=gammas,
        D=0.5 * (d_matrix + d_matrix.T), Lambda_p=lambda_p, means=centered,
        sqrt_cov=sqrt_cov, auto_centered=auto_centered,
        s_n=None if n is None else rate_scale(k, p, n))


def conditional_error_two_class(ctx: TheoryContext, delta_hat: np.ndarray,
                                d_hat: np.ndarray, xbar1: np.ndarray,
                                xbar2: np.ndarray) -> float:
    """Conditional misclassification rate of a fitted two-class rule.

    Averages the two class-conditional normal tail probabilities of the
    linear rule delta_hat' D_hat (x - (xbar1 + xbar2)/2) < 0 under the true
    class distributions.
    """
    if ctx.n_classes != 2:
        raise ValidationError("two-class formula requires a K = 2 context")
    u = np.asarray(d_hat, dtype=float) @ np.asarray(delta_hat, dtype=float)
    denom = 2.0 * float(np.sqrt(u @ ctx.Sigma @ u))
    if denom <= 0:
        raise ValidationError("denominator ||delta'D Sigma^(1/2)|| is zero")
    mu1, mu2 = ctx.means
    t1 = float(u @ (2.0 * mu2 - xbar1 - xbar2))
    t2 = float(u @ (xbar1 + xbar2 - 2.0 * mu1))
    return float(0.5 * ndtr(-t1 / denom) + 0.5 * ndtr(-t2 / denom))


def projection_distance(v_hat: np.ndarray, v_true: np.ndarray) -> float:
    """Operator norm of the difference of the orthogonal projectors onto
    span(v_hat) and span(v_true)."""
    v_hat = np.asarray(v_hat, dtype=float)
    v_true = np.asarray(v_true, dtype=float)
    q_hat = np.outer(v_hat, v_hat) / (v_hat @ v_hat)
    q_true = np.outer(v_true, v_true) / (v_true @ v_true)
    return float(np.linalg.norm(q_hat - q_true, 2))


def gaussian_block_generator(p: int = 100, n_classes: int = 3,
                             n_blocks: int = 5, ar: float = 0.6,
                             mean_seed: int = 7):
    """Factory for a common-covariance generator with fixed true parameters.

    The covariance is block diagonal with AR-correlated equal blocks; class
    means are drawn once (at factory time) on ten coordinates in the first
    and middle blocks.  The returned callable maps (n, seed) to a labeled
    dataset; the factory also returns (sigma, means) for the theory oracle.
    """
    if p % n_blocks != 0:
        raise ValidationError("p must be divisible by the block count")
    block_size = p // n_blocks
    idx = np.arange(block_size)
    block = ar ** np.abs(idx[:, None] - idx[None, :])
    sigma = scipy.linalg.block_diag(*([block] * n_blocks))
    root = _symmetric_sqrt_pair(block)[0]

    mean_rng = np.random.default_rng(np.random.SeedSequence(entropy=mean_seed,
                                                            spawn_key=(1,)))
    means = np.zeros((n_classes, p))
    signal = np.concatenate([np.arange(10),
                             (n_blocks // 2) * block_size + np.arange(10)])
    signal = signal[signal < p]
    for k in range(n_classes):
        means[k, signal] = mean_rng.normal(loc=k + 1.0, scale=1.0,
                                           size=signal.size)
    means = means - means.mean(axis=0)

    def generate(n: int, seed: int) -> LabeledDataset:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(2,)))
        labels = rng.integers(1, n_classes + 1, size=n)
        labels[:n_classes] = np.arange(1, n_classes + 1)
        noise = rng.standard_normal((n, p))
        for b in range(n_blocks):
            cols = slice(b * block_size, (b + 1) * block_size)
            noise[:, cols] = noise[:, cols] @ root
        return LabeledDataset(means[labels - 1] + noise, labels, n_classes)

    return generate, sigma, means


def consistency_experiment(generator, sigma: np.ndarray, means: np.ndarray,
                           n_list, seeds, lam: float = 0.2,
                           tau_scale: float = 1.0, kappa_scale: float = 0.5,
                           solver: SolverConfig | None = None) -> list[dict]:
    """Median estimation errors of the first component and its constraint
    subspace across sample sizes.

    For each n the tuning parameters shrink at the theoretical rate:
    tau = tau_scale * s_n and kappa = kappa_scale * s_n with
    s_n = sqrt(K log(p) / n).  Fit failures are recorded per cell rather than
    raised.  Returns one row per n with median sign-aligned component error,
    median projection distance, and the sparsity/rate constants.
    """
    ctx = build_theory(sigma, means)
    alpha_true = ctx.true_components[0]
    xi_true = ctx.B @ alpha_true
    k = ctx.n_classes
    p = ctx.means.shape[1]
    solver = solver if solver is not None else SolverConfig()
    rows = []
    for n in n_list:
        s_n = rate_scale(k, p, n)
        alpha_errs, proj_errs, failures = [], [], 0
        for seed in seeds:
            data = generator(n, seed)
            params = FitParams(penalty=PenaltySpec(tau_scale * s_n, lam),
                               kappa=kappa_scale * s_n,
                               variant=Variant.THRESHOLDED, solver=solver)
            try:
                model = fit(data, params)
            except SfdaError:
                failures += 1
                continue
            alpha_hat = model.components[0]
            if alpha_hat @ alpha_true < 0:
                alpha_hat = -alpha_hat
            alpha_errs.append(float(np.linalg.norm(alpha_hat - alpha_true)))
            if model.constraints.shape[0] >= 1:
                proj_errs.append(projection_distance(model.constraints[0],
                                                     xi_true))
        rows.append({
            "n": int(n),
            "median_alpha_err": float(np.median(alpha_errs)) if alpha_errs else float("nan"),
            "median_proj_err": float(np.median(proj_errs)) if proj_errs else float("nan"),
            "Lambda_p": ctx.Lambda_p,
            "s_n": s_n,
            "failures": failures,
        })
    return rows


def optimality_gap_experiment(generator, sigma: np.ndarray, means: np.ndarray,
                              n_list, seeds, lam: float = 0.2,
                              tau_scale: float = 1.0) -> list[dict]:
    """Median relative excess risk R(X)/R_OPT - 1 of fitted two-class rules.

    Asymptotic rate constants are not testable at desk scale, so only the
    monotone decay of the gap with n is meaningful; this produces the
    per-sample-size medians for that trend check.
    """
    ctx = build_theory(sigma, means)
    if ctx.n_classes != 2:
        raise ValidationError("optimality gap experiment requires two classes")
    delta = ctx.means[1] - ctx.means[0]
    u = ctx.D @ delta
    r_opt = float(ndtr(-float(delta @ u)
                       / (2.0 * np.sqrt(float(u @ ctx.Sigma @ u)))))
    k = 2
    p = ctx.means.shape[1]
    rows = []
    for n in n_list:
        s_n = rate_scale(k, p, n)
        gaps, failures = [], 0
        for seed in seeds:
            data = generator(n, seed)
            params = FitParams(penalty=PenaltySpec(tau_scale * s_n, lam))
            try:
                model = fit(data, params)
            except SfdaError:
                failures += 1
                continue
            xbar1, xbar2 = model.summaries.class_means
            r_x = conditional_error_two_class(ctx, xbar2 - xbar1,
                                              model.discriminant, xbar1, xbar2)
            gaps.append(r_x / r_opt - 1.0)
        rows.append({"n": int(n), "r_opt": r_opt,
                     "median_gap": float(np.median(gaps)) if gaps else float("nan"),
                     "s_n": s_n, "failures": failures})
    return rows
