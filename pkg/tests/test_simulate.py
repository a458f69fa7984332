import numpy as np
import pytest

from sfda.errors import ValidationError
from sfda.estimators import summarize
from sfda.model import FitParams, first_component
from sfda.simulate import (SimModel, SimScenario,
                           misclassification_rate, simulate)
from sfda.solver import PenaltySpec


def test_same_seed_bitwise_identical():
    scn = SimScenario(SimModel.SIM2, sigma2=2.0, seed=3)
    tr1, te1, _ = simulate(scn)
    tr2, te2, _ = simulate(scn)
    np.testing.assert_array_equal(tr1.observations, tr2.observations)
    np.testing.assert_array_equal(tr1.labels, tr2.labels)
    np.testing.assert_array_equal(te1.observations, te2.observations)


def test_mean_seed_replays_class_configuration():
    a = simulate(SimScenario(SimModel.SIM1, 1.0, seed=1, mean_seed=9))[2]
    b = simulate(SimScenario(SimModel.SIM1, 1.0, seed=2, mean_seed=9))[2]
    np.testing.assert_array_equal(a.true_means, b.true_means)


def test_split_sizes_and_label_range():
    train, test, _ = simulate(SimScenario(SimModel.SIM3, 1.0, seed=5))
    assert train.n == 150 and test.n == 1350
    assert set(np.unique(train.labels)) <= {1, 2, 3}


def test_sim1_signal_structure():
    # coordinates beyond 50 carry no signal; 31..50 separate class 3
    scn = SimScenario(SimModel.SIM1, 1.0, seed=11, n_total=6000, n_train=3000)
    train, test, truth = simulate(scn)
    obs = np.vstack([train.observations, test.observations])
    labels = np.concatenate([train.labels, test.labels])
    assert truth.true_means[:, 50:].max() == 0.0
    for k in (1, 2, 3):
        rows = obs[labels == k]
        coord_means = rows[:, 50:].mean(axis=0)
        # no-signal coordinates: per-class means are 5 standard errors from 0
        assert np.abs(coord_means).max() <= 5.0 / np.sqrt(rows.shape[0])
    m3 = obs[labels == 3][:, 30:50].mean(axis=0)
    m12 = obs[labels != 3][:, 30:50].mean(axis=0)
    # class 3 means on 31..50 are centered near N(1, 0.8^2) draws, others at 0
    assert m3.mean() > 0.5
    assert abs(m12.mean()) < 0.2


def test_sim1_true_cov_shared_factor():
    _, _, truth = simulate(SimScenario(SimModel.SIM1, 4.0, seed=2))
    cov = truth.true_cov
    assert cov[0, 1] == pytest.approx(1.0)
    assert cov[0, 0] == pytest.approx(5.0)
    assert cov[40, 41] == 0.0
    assert cov[40, 40] == pytest.approx(4.0)


def test_sim2_moment_check():
    # class-centered sample covariance at adjacent indices approaches
    # 0.6 * sigma2 as the number of draws grows
    sigma2 = 2.0
    scn = SimScenario(SimModel.SIM2, sigma2, p=110, seed=7,
                      n_total=10000, n_train=100)
    train, test, truth = simulate(scn)
    obs = np.vstack([train.observations, test.observations])
    labels = np.concatenate([train.labels, test.labels])
    centered = obs - truth.true_means[labels - 1]
    emp = centered[:, :2].T @ centered[:, :2] / centered.shape[0]
    target = 0.6 * sigma2
    se = 5 * target / np.sqrt(centered.shape[0])
    assert abs(emp[0, 1] - target) <= se
    assert truth.true_cov[0, 1] == pytest.approx(target)
    # blocks are independent
    assert truth.true_cov[0, 110 // 5] == 0.0


def test_sim3_per_class_covariances():
    _, _, truth = simulate(SimScenario(SimModel.SIM3, 3.0, p=100, seed=1))
    assert not truth.common_cov and truth.true_cov is None
    c1, c2, c3 = truth.class_covs
    assert np.count_nonzero(c1 - np.diag(np.diag(c1))) == 0
    assert (np.diag(c1) >= 0.5 * 3.0 - 1e-12).all()
    assert (np.diag(c1) <= 2.0 * 3.0 + 1e-12).all()
    assert c2[0, 1] == pytest.approx(0.9 * 3.0)
    assert c3[0, 1] == pytest.approx(0.6 * 3.0)
    assert c3[0, 0] == pytest.approx(3.0)


def test_sample_covariance_converges_with_n():
    # Frobenius distance of the class-centered sample covariance to the truth
    # shrinks as n grows (median over seeds)
    distances = {n: [] for n in (1000, 10000)}
    for seed in range(5):
        for n in distances:
            scn = SimScenario(SimModel.SIM2, 1.0, p=110, seed=seed,
                              n_total=n, n_train=100)
            train, test, truth = simulate(scn)
            obs = np.vstack([train.observations, test.observations])
            labels = np.concatenate([train.labels, test.labels])
            centered = obs - truth.true_means[labels - 1]
            emp = centered.T @ centered / centered.shape[0]
            distances[n].append(np.linalg.norm(emp - truth.true_cov))
    assert np.median(distances[10000]) < np.median(distances[1000])


def test_scenario_validation():
    with pytest.raises(ValidationError):
        SimScenario(SimModel.SIM1, sigma2=-1.0)
    with pytest.raises(ValidationError):
        SimScenario(SimModel.SIM1, 1.0, p=40)
    with pytest.raises(ValidationError):
        SimScenario(SimModel.SIM2, 1.0, p=105)
    with pytest.raises(ValidationError):
        SimScenario(SimModel.SIM2, 1.0, p=108)  # not divisible by 5
    with pytest.raises(ValidationError):
        SimScenario(SimModel.SIM1, 1.0, n_total=100, n_train=100)


def test_misclassification_rate():
    assert misclassification_rate([1, 2, 3], [1, 2, 3]) == 0.0
    assert misclassification_rate([1, 0, 1], [0, 1, 0]) == 1.0
    assert misclassification_rate([1, 2, 3], [1, 2, 1]) == pytest.approx(1 / 3)
    with pytest.raises(ValidationError):
        misclassification_rate([1, 2], [1, 2, 3])


def test_sim1_sparse_support_recovery():
    # with a sparse penalty the leading component concentrates on the
    # signal-bearing coordinates 1..50 in at least 90% of seeded runs
    hits = 0
    for seed in range(20):
        scn = SimScenario(SimModel.SIM1, 1.0, p=200, seed=seed,
                          n_total=400, n_train=150)
        train, _, _ = simulate(scn)
        s = summarize(train)
        alpha = first_component(s, FitParams(penalty=PenaltySpec(10.0, 0.4)))
        weight = np.abs(alpha)
        if weight[:50].sum() >= 0.9 * weight.sum():
            hits += 1
    assert hits >= 18
