"""Shared test utilities: independent brute-force oracles and generators."""

import numpy as np

from sfda.solver import q_form

# acceptance pass/fail lines, echoed by the terminal-summary hook in conftest
ACCEPTANCE_LINES: list[str] = []


def random_psd(rng, p, rank=None, scale=1.0):
    rank = rank if rank is not None else p
    a = rng.normal(size=(rank, p))
    m = a.T @ a / rank * scale
    return 0.5 * (m + m.T)


def random_pd(rng, p, ridge=0.5):
    return random_psd(rng, p) + ridge * np.eye(p)


def prox_grid_oracle(v, eta, rounds=5, points=41):
    """Brute-force minimizer of 0.5||x-v||^2 + eta||x||_1^2 on a shrinking grid."""
    v = np.asarray(v, dtype=float)
    p = v.size
    center = v.copy()
    width = max(1.0, 2.0 * np.abs(v).max())
    best_x = center
    for _ in range(rounds):
        axes = [np.linspace(center[i] - width, center[i] + width, points)
                for i in range(p)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        obj = 0.5 * ((pts - v) ** 2).sum(axis=1) + eta * np.abs(pts).sum(axis=1) ** 2
        best_x = pts[int(np.argmin(obj))]
        center = best_x
        width *= 2.5 / (points - 1)
    return best_x


def linear_max_value_oracle(c, cs, n_samples=200000, seed=0, polish_rounds=60):
    """Best value of c'a over {q(a) <= 1} by random-direction search plus
    coordinate-wise polish on the scale-invariant ratio c'd / sqrt(q(d))."""
    rng = np.random.default_rng(seed)
    p = c.size

    def ratio(d):
        qv = q_form(d, cs)
        if qv <= 0:
            return -np.inf
        return float(c @ d) / np.sqrt(qv)

    dirs = rng.normal(size=(n_samples, p))
    quad = np.einsum("ij,jk,ik->i", dirs, cs.quad, dirs)
    pen = cs.penalty
    l2 = (dirs ** 2).sum(axis=1)
    l1 = np.abs(dirs).sum(axis=1)
    qs = quad + pen.tau * ((1 - pen.lam) * l2 + pen.lam * l1 ** 2)
    vals = dirs @ c / np.sqrt(qs)
    best = dirs[int(np.argmax(vals))]
    best_val = ratio(best)
    step = 1.0
    for _ in range(polish_rounds):
        improved = False
        for i in range(p):
            for delta in (step, -step):
                cand = best.copy()
                cand[i] += delta
                val = ratio(cand)
                if val > best_val:
                    best, best_val, improved = cand, val, True
        if not improved:
            step *= 0.5
            if step < 1e-9:
                break
    return best_val


def make_labeled(rng, n, p, k, separation=3.0):
    """Gaussian classes with orthogonal-ish mean offsets; labels 1..k."""
    from sfda.estimators import LabeledDataset

    means = np.zeros((k, p))
    for i in range(k):
        means[i, i % p] = separation * (i + 1)
    labels = rng.integers(1, k + 1, size=n)
    labels[:k] = np.arange(1, k + 1)
    obs = means[labels - 1] + rng.normal(size=(n, p))
    return LabeledDataset(obs, labels, k)
