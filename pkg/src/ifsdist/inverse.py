"""Collage quadratic form and the penalized box-constrained minimization.

Matching pushed-forward moments h = A p to target moments g in the weighted
norm sum_k (h_k - g_k)^2 / k^2 is a quadratic in p:

    S(p) = p' Q p + B' p + C,
    q_ij = sum_k A_ki A_kj / k^2,
    B_i  = -2 sum_k g_k A_ki / k^2,
    C    = sum_k g_k^2 / k^2.

S is a sum of squares, so it is non-negative everywhere, but after
truncation Q is typically rank-deficient (rank <= M < N) and nothing here
assumes positive definiteness.  The simplex constraint is enforced by the
penalty L(p) = S(p) + lambda (1 - sum p)^2 minimized over the box [0, 1]^N
with a limited-memory quasi-Newton method, escalating lambda tenfold until
the simplex residual is small, then projecting exactly via p / sum(p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import NonConvergenceError, NumericalFailureError

__all__ = [
    "QuadraticProblem",
    "SolverConfig",
    "SolverReport",
    "assemble_quadratic_problem",
    "collage_objective",
    "penalized_objective_with_gradient",
    "solve_box_constrained",
]

_SYMMETRY_TOL = 1e-12
_SIMPLEX_TOL = 1e-6
_RESIDUAL_HARD_CAP = 1e-3
_MAX_ESCALATIONS = 6


@dataclass(frozen=True)
class QuadraticProblem:
    """The collage objective S(p) = p'Qp + B'p + C at truncation order M."""

    Q: np.ndarray
    B: np.ndarray
    C: float
    order: int

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if B.shape != (Q.shape[0],):
            raise ValueError("B length must match Q")
        if np.max(np.abs(Q - Q.T)) > _SYMMETRY_TOL:
            raise ValueError("Q must be symmetric")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the penalized box-constrained solve.

    The defaults drive the quasi-Newton iteration essentially to the
    minimizer (projected-gradient norm below tol_grad or relative objective
    change below tol_objective).  Statistical fits deliberately loosen them:
    see experiments.FIT_SOLVER_CONFIG.
    """

    lambda_init: float = 1e3
    tol_grad: float = 1e-8
    max_iter: int = 500
    history: int = 10
    tol_objective: float = 1e-12


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one penalized solve.

    ``objective`` is S (not the penalized objective) at the returned point;
    ``penalty_residual`` is |1 - sum p| before the final exact projection.
    """

    solution: np.ndarray
    objective: float
    penalty_residual: float
    iterations: int
    converged: bool
    lambda_final: float


def assemble_quadratic_problem(A: np.ndarray, g) -> QuadraticProblem:
    """Build Q, B, C from a transfer matrix and the target moment vector.

    All three sums run over k = 1..M where M is the shared truncation order.
    """
    gv = np.asarray(getattr(g, "g", g), dtype=float)
    order = gv.size - 1
    if A.shape[0] != order:
        raise ValueError("transfer matrix rows must match the moment order")
    k = np.arange(1, order + 1, dtype=float)
    Aw = A / k[:, None]
    Q = Aw.T @ Aw
    Q = 0.5 * (Q + Q.T)
    gw = gv[1:] / k**2
    B = -2.0 * (gw @ A)
    C = float(np.sum(gv[1:] ** 2 / k**2))
    return QuadraticProblem(Q=Q, B=B, C=C, order=order)


def collage_objective(qp: QuadraticProblem, p) -> float:
    """S(p) for any box point p (the simplex constraint is not required)."""
    p = np.asarray(p, dtype=float)
    return float(p @ qp.Q @ p + qp.B @ p + qp.C)


def penalized_objective_with_gradient(
    qp: QuadraticProblem, p, penalty: float
) -> tuple[float, np.ndarray]:
    """L(p) = S(p) + penalty (1 - sum p)^2 and its exact gradient."""
    if penalty <= 0:
        raise ValueError("penalty weight must be positive")
    p = np.asarray(p, dtype=float)
    gap = 1.0 - p.sum()
    qpvec = qp.Q @ p
    value = float(p @ qpvec + qp.B @ p + qp.C + penalty * gap * gap)
    grad = 2.0 * qpvec + qp.B - 2.0 * penalty * gap
    return value, grad


def solve_box_constrained(
    qp: QuadraticProblem, config: SolverConfig | None = None
) -> SolverReport:
    """Minimize S over the probability simplex via penalization on the box.

    Runs L-BFGS-B from the feasible uniform start p_i = 1/N; whenever the
    box minimizer of the penalized objective strays from the simplex by more
    than 1e-6 in |1 - sum p|, the penalty is multiplied by 10 and the solve
    restarts warm, up to 6 escalations.  The result is renormalized exactly
    and, because renormalization can nudge S upward in borderline cases,
    falls back to the uniform start whenever that is strictly better, so
    the returned objective never exceeds S(uniform).

    Raises NumericalFailureError on non-finite values and NonConvergenceError
    (carrying the report) when the residual stays above 1e-3 after all
    escalations.
    """
    cfg = config or SolverConfig()
    n = qp.n
    uniform = np.full(n, 1.0 / n)
    if not (np.all(np.isfinite(qp.Q)) and np.all(np.isfinite(qp.B)) and np.isfinite(qp.C)):
        raise NumericalFailureError("quadratic problem contains non-finite entries")
    if n == 1:
        # One-vertex simplex: nothing to optimize.
        return SolverReport(
            solution=np.ones(1),
            objective=max(collage_objective(qp, np.ones(1)), 0.0),
            penalty_residual=0.0,
            iterations=0,
            converged=True,
            lambda_final=cfg.lambda_init,
        )

    p = uniform.copy()
    penalty = cfg.lambda_init
    penalty_used = penalty
    total_iterations = 0
    residual = np.inf
    for _ in range(_MAX_ESCALATIONS):
        penalty_used = penalty
        result = minimize(
            lambda x: penalized_objective_with_gradient(qp, x, penalty),
            p,
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * n,
            options={
                "maxiter": cfg.max_iter,
                "maxcor": cfg.history,
                "gtol": cfg.tol_grad,
                "ftol": cfg.tol_objective,
            },
        )
        total_iterations += int(result.nit)
        if not (np.all(np.isfinite(result.x)) and np.isfinite(result.fun)):
            raise NumericalFailureError("solver produced non-finite iterates")
        p = np.clip(result.x, 0.0, 1.0)
        residual = abs(1.0 - p.sum())
        if residual <= _SIMPLEX_TOL:
            break
        penalty *= 10.0
    converged = residual <= _SIMPLEX_TOL

    total = p.sum()
    if total <= 0.0:
        raise NumericalFailureError("solver collapsed to the zero vector")
    projected = p / total
    if collage_objective(qp, projected) > collage_objective(qp, uniform):
        projected = uniform

    # S is a sum of squares; tiny negatives are cancellation noise in the
    # quadratic form, anything materially negative means a corrupt problem.
    objective = collage_objective(qp, projected)
    if objective < -1e-9:
        raise NumericalFailureError("collage objective evaluated significantly negative")
    report = SolverReport(
        solution=projected,
        objective=max(objective, 0.0),
        penalty_residual=float(residual),
        iterations=total_iterations,
        converged=converged,
        lambda_final=penalty_used,
    )
    if not converged and residual > _RESIDUAL_HARD_CAP:
        raise NonConvergenceError(
            f"simplex residual {residual:.3e} after penalty escalation", report=report
        )
    return report
