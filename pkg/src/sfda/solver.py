"""Penalized linear- and quadratic-objective solvers.

Solves, for a symmetric PSD matrix C, a penalty weight tau >= 0 and a mixing
weight 0 <= lam <= 1,

    maximize  c'a   subject to   q(a) <= 1,  L a = 0,

where q(a) = a'Ca + tau * ((1 - lam) ||a||_2^2 + lam * ||a||_1^2), and the
sequential quadratic maximization

    maximize  a'Pi a   subject to   q(a) <= 1,  L a = 0

by iterating the linear problem with c = Pi a (power-type updates).

The linear problem is reduced, using the degree-2 homogeneity of q, to the
unconstrained-in-scale strongly convex problem

    minimize  q(a) - 2 c'a   over  {L a = 0},

whose minimizer is rescaled onto the boundary q = 1.  The smooth quadratic
part plus the equality constraints form one splitting block (solved exactly
through a KKT system in the eigenbasis of C), the squared-l1 term forms the
other (closed-form prox); the two blocks are combined by ADMM.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DegenerateProblemError, ValidationError

_EPS = np.finfo(float).eps
SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class PenaltySpec:
    """Tuning pair (tau, lam) of the penalty tau * ((1-lam)||.||_2^2 + lam||.||_1^2)."""

    tau: float
    lam: float

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau < 0:
            raise ValidationError("tau must be finite and nonnegative")
        if not np.isfinite(self.lam) or not 0.0 <= self.lam <= 1.0:
            raise ValidationError("lambda must lie in [0, 1]")


def penalty_norm_sq(alpha: np.ndarray, lam: float) -> float:
    """(1 - lam) * ||alpha||_2^2 + lam * ||alpha||_1^2."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError("lambda must lie in [0, 1]")
    alpha = np.asarray(alpha, dtype=float)
    l2sq = float(alpha @ alpha)
    if lam == 0.0:
        return l2sq
    l1 = float(np.abs(alpha).sum())
    return (1.0 - lam) * l2sq + lam * l1 * l1


@dataclass(frozen=True)
class ConstraintSet:
    """Quadratic form, penalty and optional equality rows defining the feasible set.

    ``quad`` is p x p symmetric PSD; ``linear`` is an (m, p) matrix of equality
    constraint rows (L a = 0) or None when there are none.
    """

    quad: np.ndarray
    penalty: PenaltySpec
    linear: np.ndarray | None = None

    def __post_init__(self):
        quad = np.asarray(self.quad, dtype=float)
        if quad.ndim != 2 or quad.shape[0] != quad.shape[1]:
            raise ValidationError("quad must be a square matrix")
        scale = max(1.0, float(np.abs(quad).max(initial=0.0)))
        if np.abs(quad - quad.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise ValidationError("quad must be symmetric")
        object.__setattr__(self, "quad", quad)
        if self.linear is not None:
            lin = np.atleast_2d(np.asarray(self.linear, dtype=float))
            if lin.size == 0:
                object.__setattr__(self, "linear", None)
                return
            if lin.shape[1] != quad.shape[0]:
                raise ValidationError("linear constraint rows must have p columns")
            if lin.shape[0] >= quad.shape[0]:
                raise ValidationError("need fewer equality rows than dimensions")
            object.__setattr__(self, "linear", lin)

    @property
    def p(self) -> int:
        return self.quad.shape[0]

    @property
    def n_equalities(self) -> int:
        return 0 if self.linear is None else self.linear.shape[0]


def q_form(alpha: np.ndarray, cs: ConstraintSet) -> float:
    """Constraint functional a'Ca + tau*||a||_lam^2; 2-homogeneous in a."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (cs.p,):
        raise ValidationError(f"alpha must have length {cs.p}")
    value = float(alpha @ (cs.quad @ alpha))
    value += cs.penalty.tau * penalty_norm_sq(alpha, cs.penalty.lam)
    return value


class InitStrategy(Enum):
    """Initialization of the quadratic-objective iteration."""

    LEADING_RIDGE_EIGVEC = "leading_ridge_eigvec"
    GIVEN_VECTOR = "given_vector"
    UNIT_COORDINATE_OF_MAX_DIAG = "unit_coordinate_of_max_diag"


@dataclass(frozen=True)
class SolverConfig:
    max_outer_iters: int = 500
    max_inner_iters: int = 10000
    tol_outer: float = 1e-7
    tol_inner: float = 1e-8
    init: InitStrategy = InitStrategy.LEADING_RIDGE_EIGVEC

    def __post_init__(self):
        if self.tol_outer <= 0 or self.tol_inner <= 0:
            raise ValidationError("tolerances must be positive")
        if self.max_outer_iters < 1 or self.max_inner_iters < 1:
            raise ValidationError("iteration caps must be at least 1")


def prox_sq_l1(v: np.ndarray, eta: float) -> np.ndarray:
    """argmin_x 0.5*||x - v||_2^2 + eta*||x||_1^2.

    Sorted-threshold procedure: with u = |v| sorted descending, the solution
    is a soft threshold x = sign(v) * max(|v| - t, 0) where t = 2*eta*s and
    s = ||x||_1 solves the piecewise-linear consistency equation.  The
    support is the largest prefix k of the sorted entries with
    u_k * (1 + 2*eta*k) > 2*eta*(u_1 + ... + u_k).
    """
    v = np.asarray(v, dtype=float)
    if eta < 0:
        raise ValidationError("eta must be nonnegative")
    if eta == 0.0:
        return v.copy()
    u = np.abs(v)
    if not u.any():
        return np.zeros_like(v)
    us = np.sort(u)[::-1]
    cum = np.cumsum(us)
    k = np.arange(1, us.size + 1)
    thresholds = 2.0 * eta * cum / (1.0 + 2.0 * eta * k)
    active = us > thresholds
    k_star = int(np.nonzero(active)[0][-1])
    t = thresholds[k_star]
    return np.sign(v) * np.maximum(u - t, 0.0)


@dataclass
class RayleighResult:
    """Outcome of the quadratic-objective maximization.

    ``alpha`` sits on the boundary q(alpha) = 1 with its largest-magnitude
    entry positive; ``value`` is alpha' Pi alpha; ``objectives`` is the
    nondecreasing per-iteration objective trace.
    """

    alpha: np.ndarray
    value: float
    objectives: list[float] = field(default_factory=list)
    iterations: int = 0


class SplitWorkspace:
    """Factorizations reused by every inner solve on one constraint set.

    Diagonalizes the smooth quadratic block H = 2C + 2*tau*(1-lam)*I once;
    the per-iteration KKT systems (H + rho I) x + L' nu = b, L x = 0 are then
    solved with two dense matrix-vector products regardless of rho, so the
    ADMM penalty can adapt freely without refactorization.
    """

    def __init__(self, cs: ConstraintSet, quad_eig=None):
        self.cs = cs
        pen = cs.penalty
        if quad_eig is None:
            evals, evecs = scipy.linalg.eigh(cs.quad)
        else:
            evals, evecs = quad_eig
            evals = np.asarray(evals, dtype=float)
            evecs = np.asarray(evecs, dtype=float)
        if evals[0] < -1e-8 * max(1.0, float(evals[-1])):
            raise ValidationError("quad must be positive semidefinite")
        self.h = 2.0 * evals + 2.0 * pen.tau * (1.0 - pen.lam)
        self.basis = evecs
        self.eta = pen.tau * pen.lam
        if cs.linear is not None:
            self.constraint_basis = evecs.T @ cs.linear.T  # (p, m)
        else:
            self.constraint_basis = None
        self._rho = None
        self._weights = None
        self._schur = None

    def set_rho(self, rho: float):
        if rho == self._rho:
            return
        denom = self.h + rho
        if denom.min() <= 0:
            raise DegenerateProblemError(
                "quadratic block is singular; the problem is unbounded along "
                "a null direction (C singular with tau*(1-lam) = 0)")
        self._rho = rho
        self._weights = 1.0 / denom
        if self.constraint_basis is not None:
            g = self.constraint_basis
            schur = g.T @ (self._weights[:, None] * g)
            try:
                self._schur = scipy.linalg.cho_factor(schur)
            except scipy.linalg.LinAlgError as exc:
                raise DegenerateProblemError(
                    "equality constraint rows are numerically dependent") from exc

    def kkt_solve(self, b: np.ndarray) -> np.ndarray:
        """Minimize x'(H + rho I)x/2 - b'x subject to L x = 0."""
        bt = self.basis.T @ b
        wbt = self._weights * bt
        if self.constraint_basis is not None:
            rhs = self.constraint_basis.T @ wbt
            nu = scipy.linalg.cho_solve(self._schur, rhs)
            wbt = self._weights * (bt - self.constraint_basis @ nu)
        return self.basis @ wbt

    def project_nullspace(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of v onto {L x = 0}."""
        lin = self.cs.linear
        if lin is None:
            return np.asarray(v, dtype=float)
        gram = lin @ lin.T
        try:
            coef = scipy.linalg.solve(gram, lin @ v, assume_a="pos")
        except scipy.linalg.LinAlgError as exc:
            raise DegenerateProblemError(
                "equality constraint rows are numerically dependent") from exc
        return v - lin.T @ coef


def _rho_heuristic(ws: SplitWorkspace) -> float:
    # geometric mean of the extreme quadratic curvatures balances the ADMM
    # residuals well across the penalty grid; guard against (near-)singular
    # quadratic blocks
    h_max = max(float(ws.h.max()), 1e-12)
    h_min = max(float(ws.h.min()), 1e-4 * h_max)
    return float(np.sqrt(h_min * h_max))


def _minimize_split(c, ws: SplitWorkspace, cfg: SolverConfig, warm=None):
    """Minimize q(x) - 2 c'x over {L x = 0} by two-block ADMM.

    Returns (x, state) where x solves the KKT system of the last iteration
    (hence satisfies L x = 0 to solver precision) and state carries
    (z, u, rho) for warm starting a nearby problem.
    """
    p = c.shape[0]
    if warm is None:
        z = np.zeros(p)
        u = np.zeros(p)
        rho = _rho_heuristic(ws)
    else:
        z, u, rho = warm
        z = z.copy()
        u = u.copy()
    ws.set_rho(rho)
    eta = ws.eta
    two_c = 2.0 * c
    over_relax = 1.6
    x = ws.kkt_solve(two_c + rho * (z - u))
    for it in range(1, cfg.max_inner_iters + 1):
        x_hat = over_relax * x + (1.0 - over_relax) * z
        v = x_hat + u
        z_new = prox_sq_l1(v, eta / rho)
        u = v - z_new
        r_norm = float(np.linalg.norm(x - z_new))
        s_norm = rho * float(np.linalg.norm(z_new - z))
        z = z_new
        eps_pri = cfg.tol_inner * max(1.0, float(np.linalg.norm(x)),
                                      float(np.linalg.norm(z)))
        eps_dual = cfg.tol_inner * max(1.0, rho * float(np.linalg.norm(u)))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            return x, (z, u, rho)
        if it % 10 == 0:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u *= 0.5
                ws.set_rho(rho)
            elif s_norm > 10.0 * r_norm:
                rho *= 0.5
                u *= 2.0
                ws.set_rho(rho)
        x = ws.kkt_solve(two_c + rho * (z - u))
    raise ConvergenceError(
        f"inner solver did not reach tol_inner={cfg.tol_inner:g} within "
        f"{cfg.max_inner_iters} iterations (residual {max(r_norm, s_norm):.3e})",
        residual=max(r_norm, s_norm))


def _linear_max_core(c, cs, cfg, ws, warm=None):
    c = np.asarray(c, dtype=float)
    if c.shape != (cs.p,):
        raise ValidationError(f"c must have length {cs.p}")
    c_norm = float(np.linalg.norm(c))
    if c_norm == 0.0:
        raise ValidationError("c must be nonzero")
    projected = ws.project_nullspace(c)
    if float(np.linalg.norm(projected)) <= 1e-12 * c_norm:
        raise DegenerateProblemError(
            "degenerate objective: c has no component in the feasible subspace")
    if ws.eta == 0.0:
        ws.set_rho(0.0)
        x = ws.kkt_solve(2.0 * c)
        state = None
    else:
        x, state = _minimize_split(c, ws, cfg, warm)
    qv = q_form(x, cs)
    if qv <= 0.0 or not np.isfinite(qv):
        raise DegenerateProblemError("degenerate objective: optimum collapsed to zero")
    return x / np.sqrt(qv), state


def solve_linear_max(c: np.ndarray, cs: ConstraintSet, cfg: SolverConfig) -> np.ndarray:
    """Maximize c'a subject to q(a) <= 1 and L a = 0.

    The returned point is on the boundary q = 1 whenever the optimum is
    nonzero; equality constraints hold to solver precision.
    """
    alpha, _ = _linear_max_core(c, cs, cfg, SplitWorkspace(cs))
    return alpha


def _fix_sign(alpha: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(alpha)))
    if alpha[idx] < 0:
        return -alpha
    return alpha


def _initial_vector(pi, cs, cfg, init_vector, ws):
    if cfg.init is InitStrategy.GIVEN_VECTOR or init_vector is not None:
        if init_vector is None:
            raise ValidationError("init strategy GIVEN_VECTOR requires init_vector")
        a0 = np.asarray(init_vector, dtype=float)
        if a0.shape != (cs.p,):
            raise ValidationError(f"init_vector must have length {cs.p}")
        return a0
    if cfg.init is InitStrategy.UNIT_COORDINATE_OF_MAX_DIAG:
        a0 = np.zeros(cs.p)
        a0[int(np.argmax(np.diag(pi)))] = 1.0
        return a0
    # leading eigenvector of Pi restricted to the feasible subspace
    if cs.linear is None:
        sym = 0.5 * (pi + pi.T)
    else:
        lin = cs.linear
        gram = lin @ lin.T
        coef = scipy.linalg.solve(gram, lin, assume_a="pos")
        projected = pi - lin.T @ (coef @ pi)
        projected = projected - (projected @ lin.T) @ coef
        sym = 0.5 * (projected + projected.T)
    _, vecs = scipy.linalg.eigh(sym, subset_by_index=(cs.p - 1, cs.p - 1))
    return vecs[:, 0]


def maximize_rayleigh(pi: np.ndarray, cs: ConstraintSet, cfg: SolverConfig,
                      init_vector: np.ndarray | None = None,
                      workspace: SplitWorkspace | None = None) -> RayleighResult:
    """Maximize a'Pi a subject to q(a) <= 1 and L a = 0.

    Power-type iteration: repeatedly maximize the linearized objective
    (Pi a_prev)' a over the feasible set.  The objective trace is
    nondecreasing; iteration stops when its relative change drops below
    ``cfg.tol_outer``.  A step that fails to improve the objective (possible
    only within inner-solver tolerance of the fixed point) is rejected and
    treated as converged.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (cs.p, cs.p):
        raise ValidationError(f"Pi must be a {cs.p} x {cs.p} matrix")
    ws = workspace if workspace is not None else SplitWorkspace(cs)
    alpha = _initial_vector(pi, cs, cfg, init_vector, ws)
    grad = pi @ alpha
    pi_scale = float(np.abs(pi).max(initial=0.0))
    if float(np.linalg.norm(grad)) <= 1e3 * _EPS * pi_scale * float(np.linalg.norm(alpha)):
        raise DegenerateProblemError(
            "objective matrix annihilates the initial vector (Pi a0 = 0)")
    q0 = q_form(alpha, cs)
    if q0 > 0:
        alpha = alpha / np.sqrt(q0)
        grad = pi @ alpha
    objective = float(alpha @ grad)
    objectives: list[float] = []
    warm = None
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_outer_iters + 1):
        try:
            candidate, warm = _linear_max_core(grad, cs, cfg, ws, warm)
        except ConvergenceError as exc:
            exc.last_alpha = _fix_sign(alpha)
            exc.last_value = objective
            raise
        new_grad = pi @ candidate
        new_objective = float(candidate @ new_grad)
        if new_objective < objective:
            # only possible within inner tolerance of the fixed point
            converged = True
            break
        improvement = new_objective - objective
        alpha, grad, objective = candidate, new_grad, new_objective
        objectives.append(objective)
        if iterations >= 2 and improvement <= cfg.tol_outer * max(abs(objective), _EPS):
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"objective iteration did not converge within {cfg.max_outer_iters} "
            "outer iterations", last_alpha=_fix_sign(alpha), last_value=objective)
    return RayleighResult(alpha=_fix_sign(alpha), value=objective,
                          objectives=objectives, iterations=iterations)
