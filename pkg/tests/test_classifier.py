import numpy as np
import pytest
from scipy.special import ndtr

from sfda.classify import (OptimalRuleSpec, classify, classify_batch,
                           discriminant_classify_batch, discriminant_matrix,
                           gram_matrix, optimal_classify,
                           optimal_classify_batch, two_class_error)
from sfda.diagnostics import build_theory
from sfda.errors import DegenerateProblemError, ValidationError
from sfda.model import FitParams, fit
from sfda.solver import PenaltySpec

from helpers import make_labeled, random_pd


def test_gram_single_component():
    comp = np.array([[2.0, 0.0]])
    sigma = np.array([[0.2, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(gram_matrix(comp, sigma), [[0.8]])


def test_gram_orthogonal_components_diagonal():
    sigma = np.diag([1.0, 2.0, 3.0])
    comp = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    g = gram_matrix(comp, sigma)
    assert g[0, 1] == 0.0 and g[1, 0] == 0.0


def test_gram_matches_triple_products():
    rng = np.random.default_rng(0)
    sigma = random_pd(rng, 5)
    comp = rng.normal(size=(2, 5))
    g = gram_matrix(comp, sigma)
    for i in range(2):
        for j in range(2):
            assert g[i, j] == pytest.approx(comp[i] @ sigma @ comp[j], rel=1e-12)
    np.testing.assert_array_equal(g, g.T)


def test_discriminant_identity_gram_is_outer_sum():
    rng = np.random.default_rng(1)
    comp = rng.normal(size=(3, 6))
    d = discriminant_matrix(comp, np.eye(3))
    np.testing.assert_allclose(d, comp.T @ comp, rtol=1e-12)


def test_discriminant_psd_monte_carlo():
    rng = np.random.default_rng(2)
    comp = rng.normal(size=(2, 7))
    gram = gram_matrix(comp, random_pd(rng, 7))
    d = discriminant_matrix(comp, gram)
    xs = rng.normal(size=(1000, 7))
    vals = np.einsum("ij,jk,ik->i", xs, d, xs)
    assert (vals >= -1e-10).all()


def test_discriminant_near_singular_gram_raises():
    comp = np.array([[1.0, 0.0], [1.0, 1e-9]])
    gram = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]])
    with pytest.raises(DegenerateProblemError) as info:
        discriminant_matrix(comp, gram)
    assert getattr(info.value, "condition", None) is not None


def test_classify_exact_class_mean():
    rng = np.random.default_rng(3)
    data = make_labeled(rng, 200, 5, 3)
    model = fit(data, FitParams(penalty=PenaltySpec(0.5, 0.1)))
    for i in range(3):
        assert classify(model, model.summaries.class_means[i]) == i + 1


def test_classify_tie_breaks_to_lower_index():
    # mirror-symmetric classes make the class means bitwise negations of each
    # other, so the origin is an exact tie and the lower index must win
    rng = np.random.default_rng(4)
    block = rng.normal(loc=2.0, size=(40, 4))
    obs = np.vstack([block, -block])
    labels = np.concatenate([np.ones(40, dtype=int), np.full(40, 2)])
    from sfda.estimators import LabeledDataset
    model = fit(LabeledDataset(obs, labels, 2),
                FitParams(penalty=PenaltySpec(0.5, 0.1)))
    np.testing.assert_array_equal(model.summaries.class_means[0],
                                  -model.summaries.class_means[1])
    assert classify(model, np.zeros(4)) == 1


def test_classify_rejects_non_finite():
    rng = np.random.default_rng(5)
    data = make_labeled(rng, 100, 4, 2)
    model = fit(data, FitParams(penalty=PenaltySpec(0.5, 0.1)))
    with pytest.raises(ValidationError):
        classify(model, np.array([np.nan, 0.0, 0.0, 0.0]))


def test_classify_permutation_equivariance():
    rng = np.random.default_rng(6)
    data = make_labeled(rng, 300, 6, 3)
    model = fit(data, FitParams(penalty=PenaltySpec(1.0, 0.2)))
    xs = rng.normal(size=(50, 6)) + data.observations[:50]
    perm = rng.permutation(6)
    data_p = type(data)(data.observations[:, perm], data.labels, 3)
    model_p = fit(data_p, FitParams(penalty=PenaltySpec(1.0, 0.2)))
    np.testing.assert_array_equal(classify_batch(model, xs),
                                  classify_batch(model_p, xs[:, perm]))


def test_optimal_classify_at_true_mean_and_ties():
    means = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    spec = OptimalRuleSpec(means, np.eye(2))
    assert optimal_classify(spec, means[2]) == 3
    two = OptimalRuleSpec(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.eye(2))
    assert optimal_classify(two, np.array([0.0, 5.0])) == 1  # midpoint plane


def test_optimal_rule_agrees_with_metric_rule_via_theory():
    # the Bayes rule and the rule using the population discriminant metric
    # pick the same class on random points
    rng = np.random.default_rng(7)
    p, k = 4, 3
    sigma = random_pd(rng, p)
    means = rng.normal(scale=2.0, size=(k, p))
    ctx = build_theory(sigma, means, n=100)
    spec = OptimalRuleSpec(ctx.means, sigma, true_d=ctx.D)
    xs = rng.normal(scale=2.0, size=(10000, p))
    bayes = optimal_classify_batch(spec, xs)
    metric = discriminant_classify_batch(ctx.means, ctx.D, xs)
    assert (bayes == metric).all()


def test_two_class_error_identity_cases():
    # delta' Sigma^{-1} delta = 4 with D = Sigma^{-1} gives Phi(-1)
    rng = np.random.default_rng(8)
    p = 3
    sigma = random_pd(rng, p)
    inv = np.linalg.inv(sigma)
    raw = rng.normal(size=p)
    delta = 2.0 * raw / np.sqrt(raw @ inv @ raw)  # scaled so the form is 4
    err = two_class_error(delta, inv, sigma)
    assert err == pytest.approx(ndtr(-1.0), abs=1e-12)
    assert err == pytest.approx(0.15865525393145707, abs=1e-12)


def test_two_class_error_decreases_with_separation():
    sigma = np.eye(2)
    inv = np.eye(2)
    small = two_class_error(np.array([2.0, 0.0]), inv, sigma)
    big = two_class_error(np.array([10.0, 0.0]), inv, sigma)
    assert big < small
    assert big == pytest.approx(ndtr(-5.0), abs=1e-12)


def test_two_class_error_validation():
    with pytest.raises(ValidationError):
        two_class_error(np.zeros(2), np.eye(2), np.eye(2))
    with pytest.raises(ValidationError):
        two_class_error(np.array([1.0, 0.0]), np.zeros((2, 2)), np.eye(2))


def test_two_class_error_monte_carlo():
    # empirical error of the Bayes rule over two Gaussian classes matches
    # the closed form within 3 binomial standard errors
    rng = np.random.default_rng(9)
    p = 10
    sigma = random_pd(rng, p)
    mu = rng.normal(scale=0.4, size=p)
    means = np.vstack([-mu, mu])
    ctx = build_theory(sigma, means)
    delta = ctx.means[1] - ctx.means[0]
    r_opt = two_class_error(delta, ctx.D, sigma)
    spec = OptimalRuleSpec(ctx.means, sigma)
    n_draws = 200000
    chol = np.linalg.cholesky(sigma)
    errors = 0
    for cls in (0, 1):
        draws = ctx.means[cls] + rng.standard_normal((n_draws // 2, p)) @ chol.T
        pred = optimal_classify_batch(spec, draws)
        errors += int((pred != cls + 1).sum())
    empirical = errors / n_draws
    se = np.sqrt(r_opt * (1 - r_opt) / n_draws)
    assert abs(empirical - r_opt) <= 3 * se


def test_lemma_parallelism_of_metric_and_inverse_covariance():
    # D (mu_j - mu_i) is parallel to Sigma^{-1} (mu_j - mu_i) for all pairs
    for seed in range(5):
        rng = np.random.default_rng(20 + seed)
        p, k = 6, 4
        sigma = random_pd(rng, p)
        means = rng.normal(scale=1.5, size=(k, p))
        ctx = build_theory(sigma, means)
        for i in range(k):
            for j in range(i + 1, k):
                delta = ctx.means[j] - ctx.means[i]
                lhs = np.linalg.solve(sigma, delta)
                rhs = ctx.D @ delta
                assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(lhs)
