"""Mean-field variational analysis on the probability simplex.

Covers the free-energy functional H(t) = (beta/2) sum t_r^2 + sum B_r t_r
- sum t_r log t_r, its maximization by damped fixed-point iteration, the
tangent-space curvature test, the critical inverse temperature, and the
parametrization of the line sharing a common maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

FP_DAMPING = 0.5
FP_MAX_ITERS = 10_000
FP_TOL = 1e-12
CLUSTER_TOL = 1e-6
VALUE_TIE_TOL = 1e-9
NEGDEF_TOL = -1e-10


class MeanFieldError(ValueError):
    pass


def _field_full(field, q: int) -> np.ndarray:
    field = np.atleast_1d(np.asarray(field, dtype=float))
    if field.shape == (q,):
        return field
    if field.shape != (q - 1,):
        raise MeanFieldError(f"field must have length {q - 1} (or {q})")
    return np.append(field, 0.0)


def _check_simplex(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise MeanFieldError("simplex point has negative entries")
    if abs(t.sum() - 1.0) > 1e-12:
        raise MeanFieldError("simplex point does not sum to 1")
    return t


def h_value(beta: float, field, t) -> float:
    """Free-energy functional with the 0 log 0 := 0 convention."""
    t = _check_simplex(t)
    b_full = _field_full(field, len(t))
    ent = np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0).sum()
    return float(0.5 * beta * (t ** 2).sum() + b_full @ t - ent)


def _softmax(v: np.ndarray) -> np.ndarray:
    v = v - v.max()
    e = np.exp(v)
    return e / e.sum()


@dataclass(frozen=True)
class MeanFieldSolution:
    maximizer: np.ndarray
    value: float
    all_optima: list
    unique: bool
    tangent_hessian_negdef: bool

    def to_dict(self) -> dict:
        return {
            "maximizer": [float(v) for v in self.maximizer],
            "value": self.value,
            "all_optima": [[float(v) for v in t] for t in self.all_optima],
            "unique": self.unique,
            "tangent_hessian_negdef": self.tangent_hessian_negdef,
        }


def _fixed_point(beta: float, b_full: np.ndarray, t0: np.ndarray):
    t = t0.copy()
    for _ in range(FP_MAX_ITERS):
        t_next = (1.0 - FP_DAMPING) * t + FP_DAMPING * _softmax(beta * t + b_full)
        if np.max(np.abs(t_next - t)) < FP_TOL:
            return t_next, True
        t = t_next
    return t, False


def maximize_h(beta: float, field, q: int, n_starts: int = 20,
               seed: int = 0) -> MeanFieldSolution:
    """Multistart damped fixed-point maximization of H on the simplex."""
    if beta < 0:
        raise MeanFieldError("beta must be non-negative")
    b_full = _field_full(field, q)
    rng = np.random.Generator(np.random.Philox(key=seed))
    starts = [np.full(q, 1.0 / q)]
    for r in range(q):
        t = np.full(q, 0.1 / (q - 1))
        t[r] = 0.9
        starts.append(t)
    for _ in range(n_starts):
        starts.append(rng.dirichlet(np.ones(q)))
    points = []
    for t0 in starts:
        t, ok = _fixed_point(beta, b_full, t0)
        if ok:
            points.append(t)
    if not points:
        raise MeanFieldError("fixed-point iteration failed to converge")
    clusters = []
    for t in points:
        for c in clusters:
            if np.max(np.abs(t - c)) < CLUSTER_TOL:
                break
        else:
            clusters.append(t)
    values = np.array([h_value(beta, b_full, t) for t in clusters])
    best = float(values.max())
    optima = [c for c, v in zip(clusters, values) if v >= best - VALUE_TIE_TOL]
    maximizer = clusters[int(values.argmax())]
    negdef = tangent_hessian_negdef(beta, maximizer)
    return MeanFieldSolution(maximizer=maximizer, value=best,
                             all_optima=optima, unique=len(optima) == 1,
                             tangent_hessian_negdef=negdef)


def tangent_hessian_negdef(beta: float, m) -> bool:
    """True iff diag(beta - 1/m_r) is negative definite on sum-zero directions."""
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0):
        raise MeanFieldError("Hessian test requires a strictly interior point")
    q = len(m)
    diag = beta - 1.0 / m
    # Orthonormal basis of the sum-zero subspace.
    basis = np.linalg.qr(np.eye(q) - np.full((q, q), 1.0 / q))[0][:, : q - 1]
    restricted = basis.T @ np.diag(diag) @ basis
    return bool(np.linalg.eigvalsh(restricted)[-1] < NEGDEF_TOL)


def beta_critical(q: int) -> float:
    """Critical inverse temperature: q for q <= 2, else 2(q-1)/(q-2) log(q-1)."""
    if q < 2:
        raise MeanFieldError("need at least 2 colors")
    if q == 2:
        return 2.0
    return 2.0 * (q - 1) / (q - 2) * log(q - 1)


def inestimability_line(m, beta: float) -> np.ndarray:
    """Field B_r = log(m_r/m_q) + beta (m_q - m_r) sharing the maximizer m."""
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0):
        raise MeanFieldError("line parametrization requires interior m")
    if beta < 0:
        raise MeanFieldError("beta must be non-negative")
    q = len(m)
    return np.log(m[: q - 1] / m[q - 1]) + beta * (m[q - 1] - m[: q - 1])
