"""Maximum pseudo-likelihood fitting: joint and partial estimators.

The objective is concave in (beta, B), so a damped Newton ascent with an
Armijo backtracking line search converges to the unique maximizer
whenever one exists; divergence of the iterates is the signature of a
non-existent maximizer and is reported, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from potts_infer.coupling import CouplingMatrix
from potts_infer.model import PottsParams
from potts_infer.pseudolik import (
    ExistenceReport,
    U_STAT_ZERO_TOL,
    evaluate,
    existence_report,
)

ARMIJO_C = 1e-4
DIVERGENCE_BOUND = 500.0
T_SINGULAR_TOL = 1e-10
CURVATURE_FLOOR = 1e-12
GRAD_CURV_RATIO = 1e-3


def _is_maximizer(gnorm, eigs):
    """Certify a near-stationary point as an interior maximizer.

    The curvature must be strictly positive and the gradient must sit far
    below the smallest curvature. Along a divergent ray both quantities
    decay at the same exponential rate, so their ratio stays O(1) and
    the certificate is refused.
    """
    return eigs[0] > CURVATURE_FLOOR and gnorm <= GRAD_CURV_RATIO * eigs[0]




@dataclass(frozen=True)
class FitOptions:
    tol_grad_per_site: float = 1e-8  # convergence at |grad| <= tol * N
    max_iters: int = 200
    divergence_bound: float = DIVERGENCE_BOUND
    keep_trace: bool = False


@dataclass
class MplFit:
    beta_hat: float
    field_hat: np.ndarray
    status: str  # converged | diverged | max_iters | not_exists
    grad_norm: float
    iters: int
    existence: ExistenceReport
    value: float = float("nan")
    trace: list = field(default_factory=list)

    @property
    def beta_nonpositive(self) -> bool:
        return bool(np.isfinite(self.beta_hat) and self.beta_hat <= 0.0)

    def to_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat,
            "field_hat": [float(v) for v in np.atleast_1d(self.field_hat)],
            "status": self.status,
            "grad_norm": self.grad_norm,
            "iters": self.iters,
            "value": self.value,
            "beta_nonpositive": self.beta_nonpositive,
            "existence": self.existence.to_dict(),
        }


def _field_closed_form(x: np.ndarray, q: int) -> np.ndarray | None:
    """B_s = log(n_s / n_q); the exact field fit at beta = 0."""
    counts = np.bincount(x, minlength=q)
    if np.any(counts == 0):
        return None
    return np.log(counts[: q - 1] / counts[q - 1])


def _eval_at(a, x, q, theta_vec, free_idx, fixed_vec):
    """Evaluate l_N at the point with free coordinates theta_vec."""
    point = fixed_vec.copy()
    point[free_idx] = theta_vec
    params = PottsParams(beta=point[0], field=point[1:], q=q)
    ev = evaluate(a, x, params, want="all")
    grad = ev.gradient[free_idx]
    hess = ev.hessian[np.ix_(free_idx, free_idx)]
    return ev.value, grad, hess


def _newton_ascent(a, x, q, start, free_idx, fixed_vec, opts: FitOptions,
                   exists_hint: bool = False):
    """Damped Newton ascent over the chosen coordinates of (beta, B).

    ``exists_hint`` is the existence certificate from the predicates
    (joint_exists or the partial analogue). When it holds, the objective
    is coercive, no divergent ray exists, and a vanished gradient alone
    marks the maximizer. Without it, a near-stationary point must also
    pass the gradient-to-curvature ratio test, because on a divergent
    ray gradient and smallest curvature decay at the same rate.
    """
    theta = np.asarray(start, dtype=float).copy()
    tol = opts.tol_grad_per_site * a.n
    value, grad, hess = _eval_at(a, x, q, theta, free_idx, fixed_vec)
    trace = [(theta.copy(), value)] if opts.keep_trace else []
    status = "max_iters"
    iters = 0
    for iters in range(1, opts.max_iters + 1):
        gnorm = float(np.linalg.norm(grad))
        eigs = np.linalg.eigvalsh(-hess)
        if gnorm <= tol and (exists_hint or _is_maximizer(gnorm, eigs)):
            status = "converged"
            iters -= 1
            break
        neg_h = -hess
        step = None
        # Near-singular curvature (T_N ~ 0 directions): fall back to a
        # gradient step scaled by the largest curvature.
        if eigs[0] > T_SINGULAR_TOL * max(eigs[-1], 1.0):
            try:
                step = np.linalg.solve(neg_h, grad)
            except np.linalg.LinAlgError:
                step = None
        if step is None or grad @ step <= 0:
            lam_max = max(eigs[-1], 1e-12)
            step = grad / lam_max
        # Backtracking line search: never accept a decrease.
        t = 1.0
        g_dot = grad @ step
        accepted = False
        for _ in range(60):
            cand = theta + t * step
            cand_value, cand_grad, cand_hess = _eval_at(
                a, x, q, cand, free_idx, fixed_vec)
            if cand_value >= value + ARMIJO_C * t * g_dot:
                theta, value, grad, hess = cand, cand_value, cand_grad, cand_hess
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # Objective cannot be improved along the ascent direction at
            # machine precision: treat as converged at this resolution.
            if gnorm <= 10 * tol and (exists_hint
                                      or _is_maximizer(gnorm, eigs)):
                status = "converged"
            elif np.max(np.abs(theta)) > 0.5 * opts.divergence_bound:
                status = "diverged"
            else:
                status = "max_iters"
            break
        if opts.keep_trace:
            trace.append((theta.copy(), value))
        if np.max(np.abs(theta)) > opts.divergence_bound:
            status = "diverged"
            break
    else:
        iters = opts.max_iters
    gnorm = float(np.linalg.norm(grad))
    if status == "max_iters":
        if gnorm <= tol and (exists_hint
                             or _is_maximizer(gnorm,
                                              np.linalg.eigvalsh(-hess))):
            status = "converged"
        elif np.max(np.abs(theta)) > 0.5 * opts.divergence_bound:
            # The iterates marched far outside any plausible parameter
            # range without stabilizing: classify as divergent.
            status = "diverged"
    return theta, value, gnorm, status, iters, trace


def _assemble(theta, free_idx, fixed_vec, q):
    point = fixed_vec.copy()
    point[free_idx] = theta
    return float(point[0]), point[1:].copy()


def fit_joint(a: CouplingMatrix, x, q: int,
              opts: FitOptions = FitOptions()) -> MplFit:
    """Jointly maximize l_N over (beta, B)."""
    x = np.asarray(x, dtype=np.int64)
    report = existence_report(a, x, q)
    b0 = _field_closed_form(x, q)
    start = np.zeros(q)
    if b0 is not None:
        start[1:] = b0
    free_idx = np.arange(q)
    fixed_vec = np.zeros(q)
    theta, value, gnorm, status, iters, trace = _newton_ascent(
        a, x, q, start, free_idx, fixed_vec, opts,
        exists_hint=report.joint_exists)
    if status in ("diverged", "max_iters") and not report.joint_exists:
        status = "not_exists"
    beta_hat, field_hat = _assemble(theta, free_idx, fixed_vec, q)
    return MplFit(beta_hat=beta_hat, field_hat=field_hat, status=status,
                  grad_norm=gnorm, iters=iters, existence=report,
                  value=value, trace=trace)


def fit_beta(a: CouplingMatrix, x, q: int, field_known,
             opts: FitOptions = FitOptions()) -> MplFit:
    """Maximize beta -> l_N(beta, B) with the field held fixed."""
    x = np.asarray(x, dtype=np.int64)
    report = existence_report(a, x, q)
    field_known = np.asarray(field_known, dtype=float)
    fixed_vec = np.concatenate([[0.0], field_known])
    if report.u_stat <= U_STAT_ZERO_TOL:
        return MplFit(beta_hat=float("nan"), field_hat=field_known.copy(),
                      status="not_exists", grad_norm=float("nan"), iters=0,
                      existence=report)
    theta, value, gnorm, status, iters, trace = _newton_ascent(
        a, x, q, [0.0], np.array([0]), fixed_vec, opts,
        exists_hint=report.partial_beta_exists)
    if status in ("diverged", "max_iters") and (report.in_a2 or report.in_a3):
        status = "not_exists"
    return MplFit(beta_hat=float(theta[0]), field_hat=field_known.copy(),
                  status=status, grad_norm=gnorm, iters=iters,
                  existence=report, value=value, trace=trace)


def fit_field(a: CouplingMatrix, x, q: int, beta_known: float,
              opts: FitOptions = FitOptions()) -> MplFit:
    """Maximize B -> l_N(beta, B) with beta held fixed."""
    x = np.asarray(x, dtype=np.int64)
    report = existence_report(a, x, q)
    fixed_vec = np.zeros(q)
    fixed_vec[0] = beta_known
    b0 = _field_closed_form(x, q)
    start = b0 if b0 is not None else np.zeros(q - 1)
    theta, value, gnorm, status, iters, trace = _newton_ascent(
        a, x, q, start, np.arange(1, q), fixed_vec, opts,
        exists_hint=report.partial_b_exists)
    if status in ("diverged", "max_iters") and report.in_a4:
        status = "not_exists"
    return MplFit(beta_hat=float(beta_known), field_hat=theta.copy(),
                  status=status, grad_norm=gnorm, iters=iters,
                  existence=report, value=value, trace=trace)
