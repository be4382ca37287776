"""Log pseudo-likelihood, analytic derivatives, and existence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from potts_infer.coupling import CouplingMatrix
from potts_infer.model import PottsParams, _check_config, _softmax_rows, local_fields

U_STAT_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class PseudoLikEval:
    value: float
    gradient: np.ndarray  # (d/d beta, d/d B_1 .. d/d B_{q-1})
    hessian: np.ndarray  # q x q, same ordering


def _theta(m: np.ndarray, beta: float, b_full: np.ndarray) -> np.ndarray:
    return _softmax_rows(beta * m + b_full)


def evaluate(a: CouplingMatrix, x, params: PottsParams,
             want: str = "all") -> PseudoLikEval:
    """Evaluate l_N and (optionally) its gradient and Hessian in one pass.

    ``want`` is one of "value", "grad", "all"; lighter requests skip the
    unneeded pieces.
    """
    q = params.q
    x = _check_config(x, a.n, q)
    m = local_fields(a, x, q).values
    theta = _theta(m, params.beta, params.field_full)
    n_idx = np.arange(a.n)
    value = float(np.log(theta[n_idx, x]).sum())
    if want == "value":
        return PseudoLikEval(value, None, None)

    counts = np.bincount(x, minlength=q).astype(float)
    m_own = m[n_idx, x]
    m_mean = (m * theta).sum(axis=1)  # sum_r m_ir theta_ir per site
    grad = np.empty(q)
    grad[0] = m_own.sum() - m_mean.sum()
    grad[1:] = counts[:q - 1] - theta[:, :q - 1].sum(axis=0)
    if want == "grad":
        return PseudoLikEval(value, grad, None)
    if want != "all":
        raise ValueError(f"unknown want={want!r}")

    hess = np.empty((q, q))
    # d2/d beta2 = - sum_i sum_{a<b} (m_ia - m_ib)^2 theta_ia theta_ib
    diff = m[:, :, None] - m[:, None, :]
    pair = theta[:, :, None] * theta[:, None, :]
    hess[0, 0] = -0.5 * float((diff ** 2 * pair).sum())
    # d2/d B_s d beta = - sum_i theta_is (m_is - sum_a m_ia theta_ia)
    cross = -(theta[:, :q - 1] * (m[:, :q - 1] - m_mean[:, None])).sum(axis=0)
    hess[0, 1:] = cross
    hess[1:, 0] = cross
    # B-block: diag - sum_i theta_is (1-theta_is), off-diag sum_i theta_ir theta_is
    tb = theta[:, :q - 1]
    bb = tb.T @ tb
    np.fill_diagonal(bb, (tb * (tb - 1.0)).sum(axis=0))
    hess[1:, 1:] = bb
    return PseudoLikEval(value, grad, hess)


def _mean_fields(m: np.ndarray) -> np.ndarray:
    return m.mean(axis=0)


def u_stat(a: CouplingMatrix, x, q: int) -> float:
    """(1/N) sum_{r<s} sum_i (m_ir - m_is)^2."""
    m = local_fields(a, x, q).values
    total = 0.0
    for r, s in combinations(range(q), 2):
        total += float(((m[:, r] - m[:, s]) ** 2).sum())
    return total / a.n


def t_stat(a: CouplingMatrix, x, q: int) -> float:
    """Definitional centered dispersion of local-field differences."""
    m = local_fields(a, x, q).values
    mbar = _mean_fields(m)
    total = 0.0
    for r, s in combinations(range(q), 2):
        total += float(((m[:, r] - m[:, s]) ** 2).mean()) - (mbar[r] - mbar[s]) ** 2
    return total


def t_stat_alt(a: CouplingMatrix, x, q: int) -> float:
    """Equivalent form (q/N) sum_{i,r} (m_ir - mbar_r - (R_i - Rbar)/q)^2."""
    m = local_fields(a, x, q).values
    mbar = _mean_fields(m)
    r_i = a.row_sums
    centered = m - mbar[None, :] - ((r_i - r_i.mean()) / q)[:, None]
    return float(q * (centered ** 2).sum() / a.n)


@dataclass(frozen=True)
class ExistenceReport:
    in_lambda: bool
    in_omega: bool
    omega_witness: tuple | None  # (r, s, i, j, k, l) when in_omega
    in_a2: bool
    in_a3: bool
    in_a4: bool
    t_stat: float
    u_stat: float

    @property
    def joint_exists(self) -> bool:
        return self.in_lambda and self.in_omega

    @property
    def partial_beta_exists(self) -> bool:
        return (not self.in_a2) and (not self.in_a3) and self.u_stat > U_STAT_ZERO_TOL

    @property
    def partial_b_exists(self) -> bool:
        return not self.in_a4

    def to_dict(self) -> dict:
        return {
            "in_lambda": self.in_lambda,
            "in_omega": self.in_omega,
            "omega_witness": list(self.omega_witness) if self.omega_witness else None,
            "in_a2": self.in_a2,
            "in_a3": self.in_a3,
            "in_a4": self.in_a4,
            "t_stat": self.t_stat,
            "u_stat": self.u_stat,
            "joint_exists": self.joint_exists,
            "partial_beta_exists": self.partial_beta_exists,
            "partial_b_exists": self.partial_b_exists,
        }


def _extreme_two(vals: np.ndarray, idx: np.ndarray, largest: bool):
    """Indices (into the original sites) of the two extreme values."""
    order = np.argsort(vals)
    if largest:
        order = order[::-1]
    return [int(idx[k]) for k in order[:2]]


def _omega_pair_witness(mtil: np.ndarray, sites_r: np.ndarray,
                        sites_s: np.ndarray):
    """Separated-pair search for one color pair.

    Needs a low (r-site, s-site) pair and a disjoint high (r-site, s-site)
    pair with strict max < min separation. Only the two smallest and two
    largest values per color class can matter.
    """
    if len(sites_r) < 2 or len(sites_s) < 2:
        return None
    low_r = _extreme_two(mtil[sites_r], sites_r, largest=False)
    high_r = _extreme_two(mtil[sites_r], sites_r, largest=True)
    low_s = _extreme_two(mtil[sites_s], sites_s, largest=False)
    high_s = _extreme_two(mtil[sites_s], sites_s, largest=True)
    for i in low_r:
        for j in low_s:
            for k in high_r:
                if k == i:
                    continue
                for l in high_s:
                    if l == j:
                        continue
                    if max(mtil[i], mtil[j]) < min(mtil[k], mtil[l]):
                        return (i, j, k, l)
    return None


def existence_report(a: CouplingMatrix, x, q: int) -> ExistenceReport:
    x = _check_config(x, a.n, q)
    m = local_fields(a, x, q).values
    counts = np.bincount(x, minlength=q)
    in_lambda = bool(np.all(counts > 0))
    in_a4 = bool(np.any(counts == 0))
    own = m[np.arange(a.n), x]
    in_a2 = bool(np.all(own == m.min(axis=1)))
    in_a3 = bool(np.all(own == m.max(axis=1)))

    in_omega = False
    witness = None
    for r in range(q):
        for s in range(r + 1, q):
            sites_r = np.nonzero(x == r)[0]
            sites_s = np.nonzero(x == s)[0]
            mtil = m[:, r] - m[:, s]
            w = _omega_pair_witness(mtil, sites_r, sites_s)
            if w is not None:
                in_omega = True
                witness = (r, s, *w)
                break
        if in_omega:
            break

    return ExistenceReport(
        in_lambda=in_lambda,
        in_omega=in_omega,
        omega_witness=witness,
        in_a2=in_a2,
        in_a3=in_a3,
        in_a4=in_a4,
        t_stat=t_stat(a, x, q),
        u_stat=u_stat(a, x, q),
    )


def omega_brute_force(a: CouplingMatrix, x, q: int) -> bool:
    """Exhaustive separated-quadruple scan; oracle for the fast check."""
    x = _check_config(x, a.n, q)
    m = local_fields(a, x, q).values
    for r in range(q):
        for s in range(r + 1, q):
            sites_r = np.nonzero(x == r)[0]
            sites_s = np.nonzero(x == s)[0]
            mtil = m[:, r] - m[:, s]
            for i in sites_r:
                for j in sites_s:
                    for k in sites_r:
                        if k == i:
                            continue
                        for l in sites_s:
                            if l == j:
                                continue
                            if max(mtil[i], mtil[j]) < min(mtil[k], mtil[l]):
                                return True
    return False


def hessian_constant(q: int, gamma: float) -> float:
    """Curvature constant q^(q-2) / (C(q,2) gamma^2 + (q-1)^2)^(q-1)."""
    from math import comb
    return q ** (q - 2) / (comb(q, 2) * gamma ** 2 + (q - 1) ** 2) ** (q - 1)


def theta_lower_bound(params: PottsParams, gamma: float) -> float:
    """Uniform conditional-probability floor q^-1 exp(-beta gamma - 2|B|_inf)."""
    b_inf = float(np.max(np.abs(params.field_full)))
    return np.exp(-params.beta * gamma - 2.0 * b_inf) / params.q
