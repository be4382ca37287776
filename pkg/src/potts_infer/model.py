"""Potts measure: local fields, conditionals, exact enumeration, samplers.

Colors are 0-based integers ``0..q-1`` throughout the Python API; the
plain-text configuration format is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from potts_infer import _gibbs
from potts_infer.coupling import CouplingMatrix


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PottsParams:
    beta: float
    field: np.ndarray  # length q-1, convention B_q = 0
    q: int

    def __post_init__(self):
        object.__setattr__(self, "field", np.atleast_1d(np.asarray(self.field, dtype=float)))
        if self.q < 2:
            raise ModelError("need at least 2 colors")
        if self.field.shape != (self.q - 1,):
            raise ModelError(f"field must have length q-1={self.q - 1}")
        if not (np.isfinite(self.beta) and np.all(np.isfinite(self.field))):
            raise ModelError("parameters must be finite")

    @property
    def field_full(self) -> np.ndarray:
        """Length-q field with the trailing zero made explicit."""
        return np.append(self.field, 0.0)


def _check_config(x: np.ndarray, n: int, q: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (n,):
        raise ModelError(f"configuration must have length {n}")
    if x.min() < 0 or x.max() >= q:
        raise ModelError(f"colors must lie in 0..{q - 1}")
    return x


@dataclass
class LocalFieldTable:
    """N x q matrix of coupling-weighted color counts, m[i, r]."""

    values: np.ndarray
    coupling: CouplingMatrix = field(repr=False)

    def update(self, i: int, old: int, new: int) -> None:
        """Apply the single-site flip x_i: old -> new incrementally."""
        if old == new:
            return
        idx, vals = self.coupling.row(i)
        self.values[idx, old] -= vals
        self.values[idx, new] += vals


def local_fields(a: CouplingMatrix, x, q: int) -> LocalFieldTable:
    x = _check_config(x, a.n, q)
    return LocalFieldTable(values=a.matvec_indicator(x, q), coupling=a)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def conditional_probs(a: CouplingMatrix, x, params: PottsParams) -> np.ndarray:
    """N x q table of single-site conditionals theta[i, r]."""
    m = local_fields(a, x, params.q).values
    return _softmax_rows(params.beta * m + params.field_full)


def log_unnormalized_density(a: CouplingMatrix, x, params: PottsParams) -> float:
    x = _check_config(x, a.n, params.q)
    m = a.matvec_indicator(x, params.q)
    interaction = m[np.arange(a.n), x].sum()
    counts = np.bincount(x, minlength=params.q)
    return float(0.5 * params.beta * interaction + counts @ params.field_full)


@dataclass(frozen=True)
class ExactDistribution:
    """Exhaustive pmf over [q]^N in mixed-radix order (site 0 slowest)."""

    n: int
    q: int
    probs: np.ndarray
    log_z: float

    def index_of(self, x) -> int:
        x = np.asarray(x, dtype=np.int64)
        idx = 0
        for c in x:
            idx = idx * self.q + int(c)
        return idx

    def config_of(self, idx: int) -> np.ndarray:
        out = np.empty(self.n, dtype=np.int64)
        for pos in range(self.n - 1, -1, -1):
            out[pos] = idx % self.q
            idx //= self.q
        return out


def _enumerate_configs(n: int, q: int) -> np.ndarray:
    """All q^n configurations, site 0 varying slowest (mixed-radix order)."""
    total = q ** n
    idx = np.arange(total)
    cols = []
    for pos in range(n - 1, -1, -1):
        cols.append(idx % q)
        idx = idx // q
    return np.stack(cols[::-1], axis=1)


def exact_distribution(a: CouplingMatrix, params: PottsParams,
                       n_limit: int = 10_000_000) -> ExactDistribution:
    total = params.q ** a.n
    if total > n_limit:
        raise ModelError(f"state space of size {total} exceeds limit {n_limit}")
    dense = a.dense()
    b_full = params.field_full
    log_w = np.empty(total)
    chunk = 1 << 16
    configs = _enumerate_configs(a.n, params.q)
    for lo in range(0, total, chunk):
        block = configs[lo:lo + chunk]
        # (beta/2) sum_{i,j} a_ij 1[x_i = x_j] via per-color indicators
        same = np.zeros(block.shape[0])
        for r in range(params.q):
            ind = (block == r).astype(float)
            same += np.einsum("ki,ij,kj->k", ind, dense, ind)
        fields = b_full[block].sum(axis=1)
        log_w[lo:lo + chunk] = 0.5 * params.beta * same + fields
    hi = log_w.max()
    w = np.exp(log_w - hi)
    z = w.sum()
    return ExactDistribution(n=a.n, q=params.q, probs=w / z,
                             log_z=float(np.log(z) + hi))


def gibbs_sample(a: CouplingMatrix, params: PottsParams, n_sweeps: int,
                 burn_in: int, thin: int, seed: int, scan: str = "systematic",
                 init=None) -> np.ndarray:
    """Single-site Gibbs sampler; returns kept configurations (n_kept, N).

    Deterministic given ``seed``: all randomness comes from one Philox
    stream consumed in a documented order (initial colors, then site
    visit orders for random scan, then one uniform per site update).
    """
    if n_sweeps < 0 or burn_in < 0:
        raise ModelError("sweep counts must be non-negative")
    if thin < 1:
        raise ModelError("thinning must be >= 1")
    if scan not in ("systematic", "random"):
        raise ModelError(f"unknown scan order {scan!r}")
    n, q = a.n, params.q
    rng = np.random.Generator(np.random.Philox(key=seed))
    if init is None:
        colors = rng.integers(0, q, size=n)
    else:
        colors = _check_config(init, n, q).copy()
    total = burn_in + n_sweeps
    if scan == "systematic":
        site_order = np.broadcast_to(np.arange(n), (max(total, 1), n))
        site_order = np.ascontiguousarray(site_order)
    else:
        site_order = rng.integers(0, n, size=(max(total, 1), n))
    uniforms = rng.random((max(total, 1), n))
    n_kept = 0 if n_sweeps == 0 else (n_sweeps - 1) // thin + 1
    out = np.empty((n_kept, n), dtype=np.int64)
    if total > 0:
        csr = a.csr()
        m = a.matvec_indicator(colors, q)
        _gibbs.run_sweeps(csr.indptr, csr.indices, csr.data,
                          colors, m, params.beta, params.field_full,
                          site_order, uniforms, n_sweeps, burn_in, thin, out)
    return out


def cw_augmented_sample(params: PottsParams, n: int, n_iters: int, seed: int,
                        burn_in: int = 50, thin: int = 1) -> np.ndarray:
    """Curie-Weiss sampler via the Gaussian data-augmentation chain.

    Alternates Z_r ~ Normal(Xbar_r, 1/(beta n)) with an i.i.d. redraw of
    all sites from softmax(beta Z + B). Valid only for the complete-graph
    coupling a_ij = 1/n.
    """
    if params.beta <= 0:
        raise ModelError("augmented sampler requires beta > 0")
    if n < 2:
        raise ModelError("need at least 2 sites")
    rng = np.random.Generator(np.random.Philox(key=seed))
    q = params.q
    b_full = params.field_full
    x = rng.integers(0, q, size=n)
    sd = 1.0 / np.sqrt(params.beta * n)
    kept = []
    for it in range(burn_in + n_iters):
        xbar = np.bincount(x, minlength=q) / n
        z = xbar + sd * rng.standard_normal(q)
        logits = params.beta * z + b_full
        logits -= logits.max()
        p = np.exp(logits)
        p /= p.sum()
        x = rng.choice(q, size=n, p=p)
        if it >= burn_in and (it - burn_in) % thin == 0:
            kept.append(x.copy())
    return np.array(kept, dtype=np.int64)


def cw_augmented_kernel_probs(params: PottsParams, z: np.ndarray) -> np.ndarray:
    """Conditional color law of a single site given the augmentation Z."""
    logits = params.beta * np.asarray(z, dtype=float) + params.field_full
    logits = logits - logits.max()
    p = np.exp(logits)
    return p / p.sum()


# --- configuration file format: one line per sample, 1-based colors.

def save_configurations(samples: np.ndarray, path) -> None:
    samples = np.atleast_2d(np.asarray(samples, dtype=np.int64))
    with open(path, "w") as f:
        for row in samples:
            f.write(" ".join(str(c + 1) for c in row) + "\n")


def load_configurations(path) -> np.ndarray:
    rows = []
    with open(path) as f:
        for line in f:
            if line.strip():
                rows.append([int(tok) - 1 for tok in line.split()])
    if not rows:
        raise ModelError(f"no configurations in {path}")
    return np.array(rows, dtype=np.int64)
