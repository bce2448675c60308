"""Desk-scale LASSO experiment: synthetic data, coordinate descent, KKT check.

The objective is the unscaled form

    sum_i (y_i - x_i . q)^2 + lam * ||q||_1

(no ``1/(2n)`` factor).  In the common ``(1/(2n)) RSS + lam' ||q||_1``
convention the penalties relate by ``lam = 2 * n * lam'``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import l1_norm
from .errors import DomainError
from .limits import SweepRow, sweep_phi_surrogate, sweep_shift_surrogate

__all__ = [
    "LassoProblem",
    "LassoSolution",
    "make_problem",
    "soft_threshold",
    "objective",
    "kkt_residual",
    "solve_lasso",
    "surrogate_report",
]


@dataclass(frozen=True)
class LassoProblem:
    x: np.ndarray
    y: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, ndmin=2)
        y = np.array(self.y, dtype=np.float64, ndmin=1)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DomainError(f"x must be n-by-K and y length n, got {x.shape} and {y.shape}")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise DomainError("need n >= 1 and K >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("x and y must be finite")
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0.0:
            raise DomainError(f"lambda must be nonnegative and finite, got {self.lam!r}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def k(self) -> int:
        return self.x.shape[1]

    def with_lambda(self, lam: float) -> "LassoProblem":
        return LassoProblem(self.x, self.y, lam)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "lambda": self.lam,
            "x": self.x.ravel().tolist(),
            "y": self.y.tolist(),
        }


@dataclass
class LassoSolution:
    q_hat: np.ndarray
    objective: float
    l1: float
    kkt_residual: float
    iterations: int
    converged: bool
    rss: float
    lam: float
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def accepted(self) -> bool:
        """KKT certificate: residual at most ``1e-6 * (1 + lambda)``."""
        return self.kkt_residual <= 1e-6 * (1.0 + self.lam)

    def to_dict(self) -> dict:
        return {
            "q_hat": self.q_hat.tolist(),
            "objective": self.objective,
            "rss": self.rss,
            "l1": self.l1,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "accepted": self.accepted,
        }


def make_problem(
    n: int, k: int, sparsity: int, noise_sd: float, seed: int, lam: float = 0.0
) -> tuple[LassoProblem, np.ndarray]:
    """Synthetic regression instance and its ground-truth coefficients.

    ``x`` has i.i.d. standard normal entries; ``sparsity`` coefficients,
    chosen uniformly without replacement, get magnitude ``U(0.5, 2)`` with a
    random sign; ``y = x @ q_true + noise_sd * N(0, 1)``.
    """
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if not 0 <= sparsity <= k:
        raise DomainError(f"sparsity must lie in [0, k], got {sparsity}")
    if not (math.isfinite(noise_sd) and noise_sd >= 0.0):
        raise DomainError(f"noise_sd must be nonnegative, got {noise_sd!r}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k))
    q_true = np.zeros(k)
    support = rng.choice(k, size=sparsity, replace=False)
    signs = rng.choice([-1.0, 1.0], size=sparsity)
    q_true[support] = signs * rng.uniform(0.5, 2.0, size=sparsity)
    y = x @ q_true
    if noise_sd > 0.0:
        y = y + noise_sd * rng.standard_normal(n)
    return LassoProblem(x, y, lam), q_true


def soft_threshold(z, thresh):
    return np.sign(z) * np.maximum(np.abs(z) - thresh, 0.0)


def objective(problem: LassoProblem, q) -> float:
    r = problem.y - problem.x @ q
    return float(r @ r) + problem.lam * l1_norm(q)


def kkt_residual(problem: LassoProblem, q) -> float:
    """Largest violation of the stationarity conditions at ``q``.

    With ``g = 2 X^T (y - Xq)``: ``|g_k - lam*sign(q_k)|`` on the support and
    ``max(0, |g_k| - lam)`` off it.
    """
    q = np.asarray(q, dtype=np.float64)
    g = 2.0 * (problem.x.T @ (problem.y - problem.x @ q))
    active = q != 0.0
    viol = np.where(
        active,
        np.abs(g - problem.lam * np.sign(q)),
        np.maximum(0.0, np.abs(g) - problem.lam),
    )
    return float(np.max(viol))


def solve_lasso(
    problem: LassoProblem,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    standardize: bool = False,
    refresh_every: int = 20,
) -> LassoSolution:
    """Cyclic coordinate descent with exact soft-threshold coordinate updates.

    Coordinates are visited in index order; a sweep counts as one iteration.
    Stops when the largest coordinate change within a sweep is at most
    ``tol`` or after ``max_iter`` sweeps (then ``converged`` is False).

    The gradient ``X^T r`` is updated incrementally from the Gram matrix and
    recomputed exactly every ``refresh_every`` sweeps and at the end.

    With ``standardize=True`` columns are scaled to unit norm, the problem is
    solved in that basis (the penalty then weights coefficient ``k`` by the
    norm of column ``k``) and the solution mapped back.
    """
    if not (tol > 0.0):
        raise DomainError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter!r}")
    if standardize:
        norms = np.linalg.norm(problem.x, axis=0)
        norms[norms == 0.0] = 1.0
        inner = solve_lasso(
            LassoProblem(problem.x / norms, problem.y, problem.lam), tol, max_iter,
            refresh_every=refresh_every,
        )
        q = inner.q_hat / norms
        r = problem.y - problem.x @ q
        rss = float(r @ r)
        return LassoSolution(
            q, rss + problem.lam * l1_norm(q), l1_norm(q), inner.kkt_residual,
            inner.iterations, inner.converged, rss, problem.lam, inner.history,
        )

    x, y, lam = problem.x, problem.y, problem.lam
    gram = x.T @ x
    xty = x.T @ y
    diag = np.diag(gram).copy()
    half = 0.5 * lam
    q = np.zeros(problem.k)
    h = xty.copy()  # X^T r with r = y - Xq
    history = [objective(problem, q)]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        max_change = 0.0
        for j in range(problem.k):
            if diag[j] == 0.0:
                continue
            old = q[j]
            rho = h[j] + diag[j] * old
            new = math.copysign(max(abs(rho) - half, 0.0), rho) / diag[j]
            delta = new - old
            if delta != 0.0:
                q[j] = new
                h -= gram[:, j] * delta
                max_change = max(max_change, abs(delta))
        if it % refresh_every == 0:
            h = xty - gram @ q
        history.append(objective(problem, q))
        if max_change <= tol:
            converged = True
            break
    r = y - x @ q
    rss = float(r @ r)
    l1 = l1_norm(q)
    return LassoSolution(
        q_hat=q,
        objective=rss + lam * l1,
        l1=l1,
        kkt_residual=kkt_residual(problem, q),
        iterations=it,
        converged=converged,
        rss=rss,
        lam=lam,
        history=history,
    )


def surrogate_report(
    solution: LassoSolution, alpha: float, beta_grid, m_family
) -> list[SweepRow]:
    """Gaps ``||q_hat||_1 - D`` for both smooth surrogates of the l1 norm.

    The phi-divergence rows use ``D_{phi_{alpha,beta,1/beta}}(q_hat, (1/m) 1)``
    and the shift rows ``D^new_{phi_{alpha,beta,1/beta}, (1/m) 1, 1}(q_hat, 0)``;
    they are distinguished by their ``mode`` label prefix (``phi/`` or ``new/``).
    """
    q = solution.q_hat
    k = q.shape[0]
    rows = sweep_phi_surrogate(q, beta_grid, m_family, alpha)
    rows += sweep_shift_surrogate(q, np.zeros(k), np.ones(k), beta_grid, m_family, alpha)
    return rows


def dumps_solution(problem: LassoProblem, solution: LassoSolution) -> str:
    payload = problem.to_dict()
    payload.update(solution.to_dict())
    return json.dumps(payload)
