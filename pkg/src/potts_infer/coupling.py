"""Coupling matrix builders, summary statistics, and file I/O.

A coupling matrix is a symmetric non-negative N x N matrix with zero
diagonal. Builders return :class:`CouplingMatrix` objects which are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

# Switch to a sparse representation below this fill fraction.
SPARSE_DENSITY_CUTOFF = 0.25


class CouplingError(ValueError):
    """Invalid coupling construction parameters or matrix contents."""


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric non-negative coupling with cached row sums."""

    n: int
    entries: object  # np.ndarray or scipy.sparse.csr_matrix
    row_sums: np.ndarray = field(repr=False)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.entries.toarray()
        return self.entries

    def csr(self) -> sp.csr_matrix:
        if self.is_sparse:
            return self.entries
        return sp.csr_matrix(self.entries)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices and values of the nonzero entries of row ``i``."""
        if self.is_sparse:
            sl = slice(self.entries.indptr[i], self.entries.indptr[i + 1])
            return self.entries.indices[sl], self.entries.data[sl]
        row = self.entries[i]
        idx = np.nonzero(row)[0]
        return idx, row[idx]

    def matvec_indicator(self, x: np.ndarray, q: int) -> np.ndarray:
        """Compute the N x q matrix whose column r is A @ 1[x == r]."""
        ind = np.zeros((self.n, q))
        ind[np.arange(self.n), x] = 1.0
        return np.asarray(self.entries @ ind)


@dataclass(frozen=True)
class CouplingStats:
    gamma: float  # max row sum
    mean_interaction: float  # (1'A1)/N
    non_mean_field: float  # (1/N) sum a_ij^2
    irregularity: float  # (1/N) sum (R_i - Rbar)^2
    r_bar: float


def _finalize(dense: np.ndarray) -> CouplingMatrix:
    """Validate a dense symmetric build and pick the storage layout."""
    n = dense.shape[0]
    if dense.shape != (n, n):
        raise CouplingError("coupling matrix must be square")
    if np.any(dense < 0):
        raise CouplingError("coupling entries must be non-negative")
    if np.any(np.diag(dense) != 0):
        raise CouplingError("coupling diagonal must be zero")
    if not np.array_equal(dense, dense.T):
        raise CouplingError("coupling matrix must be symmetric")
    row_sums = dense.sum(axis=1)
    nnz = int(np.count_nonzero(dense))
    if nnz < n * n * SPARSE_DENSITY_CUTOFF:
        entries = sp.csr_matrix(dense)
    else:
        entries = dense
    row_sums.setflags(write=False)
    return CouplingMatrix(n=n, entries=entries, row_sums=row_sums)


def _from_edges(edges: np.ndarray, n: int, weight: float) -> CouplingMatrix:
    dense = np.zeros((n, n))
    dense[edges[:, 0], edges[:, 1]] = weight
    dense[edges[:, 1], edges[:, 0]] = weight
    return _finalize(dense)


def from_dense(matrix) -> CouplingMatrix:
    """Wrap an explicit symmetric non-negative matrix with zero diagonal."""
    return _finalize(np.array(matrix, dtype=float))


def scaled_adjacency(edge_list, n: int) -> CouplingMatrix:
    """Coupling a_ij = n / (2|E|) on the edges of a simple graph."""
    if n < 2:
        raise CouplingError("need at least 2 vertices")
    edges = np.asarray(list(edge_list), dtype=np.int64)
    if edges.size == 0:
        raise CouplingError("edge list is empty: scaling is undefined")
    edges = edges.reshape(-1, 2)
    if np.any(edges < 0) or np.any(edges >= n):
        raise CouplingError("edge endpoint out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise CouplingError("self-loops are not allowed")
    # Deduplicate unordered pairs so |E| counts distinct edges.
    canon = np.sort(edges, axis=1)
    canon = np.unique(canon, axis=0)
    m = canon.shape[0]
    return _from_edges(canon, n, n / (2.0 * m))


def curie_weiss(n: int) -> CouplingMatrix:
    """Complete-graph coupling a_ij = 1/n off the diagonal."""
    if n < 2:
        raise CouplingError("need at least 2 vertices")
    dense = np.full((n, n), 1.0 / n)
    np.fill_diagonal(dense, 0.0)
    return _finalize(dense)


def _pair_uniforms(n: int, seed: int) -> np.ndarray:
    """One uniform per unordered pair {i,j}, i<j, in lexicographic order.

    The draw order is part of the reproducibility contract: a single
    counter-based stream consumed pair by pair.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.random(n * (n - 1) // 2)


def _pair_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(n, k=1)
    return iu[0], iu[1]


def erdos_renyi(n: int, p: float, seed: int) -> CouplingMatrix:
    """Erdos-Renyi coupling: each edge carries weight 1/(n p) w.p. p."""
    if n < 2:
        raise CouplingError("need at least 2 vertices")
    if not (0.0 < p <= 1.0):
        raise CouplingError("edge probability must lie in (0, 1]")
    u = _pair_uniforms(n, seed)
    keep = u < p
    if not np.any(keep):
        raise CouplingError("sampled graph has no edges")
    ii, jj = _pair_index_arrays(n)
    edges = np.column_stack([ii[keep], jj[keep]])
    return _from_edges(edges, n, 1.0 / (n * p))


def sbm(n: int, block_fraction: float, p1: float, p2: float,
        q_between: float, seed: int) -> CouplingMatrix:
    """Scaled adjacency of a two-block stochastic block model."""
    if not (0.0 < block_fraction < 1.0):
        raise CouplingError("block fraction must lie strictly in (0, 1)")
    for name, prob in (("p1", p1), ("p2", p2), ("q_between", q_between)):
        if not (0.0 <= prob <= 1.0):
            raise CouplingError(f"{name} must lie in [0, 1]")
    if n < 2:
        raise CouplingError("need at least 2 vertices")
    m = int(round(block_fraction * n))
    m = min(max(m, 1), n - 1)
    block = np.zeros(n, dtype=np.int64)
    block[m:] = 1
    u = _pair_uniforms(n, seed)
    ii, jj = _pair_index_arrays(n)
    same1 = (block[ii] == 0) & (block[jj] == 0)
    same2 = (block[ii] == 1) & (block[jj] == 1)
    prob = np.where(same1, p1, np.where(same2, p2, q_between))
    keep = u < prob
    if not np.any(keep):
        raise CouplingError("sampled block-model graph has no edges")
    edges = np.column_stack([ii[keep], jj[keep]])
    return scaled_adjacency(edges, n)


def disjoint_cliques(m: int, n_minus_m: int) -> CouplingMatrix:
    """Scaled adjacency of K_m together with a disjoint K_{n-m}."""
    if m < 2 or n_minus_m < 2:
        raise CouplingError("each clique needs at least 2 vertices")
    n = m + n_minus_m
    edges = []
    for lo, hi in ((0, m), (m, n)):
        for i in range(lo, hi):
            for j in range(i + 1, hi):
                edges.append((i, j))
    return scaled_adjacency(edges, n)


def complete_bipartite(m: int, n_minus_m: int) -> CouplingMatrix:
    """Scaled adjacency of the complete bipartite graph K_{m, n-m}."""
    if m < 1 or n_minus_m < 1:
        raise CouplingError("each part needs at least 1 vertex")
    n = m + n_minus_m
    edges = [(i, j) for i in range(m) for j in range(m, n)]
    return scaled_adjacency(edges, n)


def circulant(n: int, offsets=(1, 2)) -> CouplingMatrix:
    """Scaled adjacency of a circulant graph (offsets +/-k mod n)."""
    if n < 2 * max(offsets) + 1:
        raise CouplingError("n too small for the requested offsets")
    edges = [(i, (i + k) % n) for i in range(n) for k in offsets]
    return scaled_adjacency(edges, n)


def stats(a: CouplingMatrix) -> CouplingStats:
    r = a.row_sums
    r_bar = float(r.mean())
    if a.is_sparse:
        sq = float((a.entries.data ** 2).sum())
    else:
        sq = float((a.entries ** 2).sum())
    return CouplingStats(
        gamma=float(r.max()),
        mean_interaction=float(r.sum() / a.n),
        non_mean_field=sq / a.n,
        irregularity=float(((r - r_bar) ** 2).mean()),
        r_bar=r_bar,
    )


# --- plain-text matrix format: "potts-coupling v1 <n> <nnz>" header then
# --- 1-based "i j value" triples over the upper triangle.

def save_coupling(a: CouplingMatrix, path) -> None:
    coo = a.csr().tocoo()
    mask = coo.row < coo.col
    rows, cols, vals = coo.row[mask], coo.col[mask], coo.data[mask]
    order = np.lexsort((cols, rows))
    with open(path, "w") as f:
        f.write(f"potts-coupling v1 {a.n} {len(rows)}\n")
        for k in order:
            f.write(f"{rows[k] + 1} {cols[k] + 1} {vals[k]:.17g}\n")


def load_coupling(path) -> CouplingMatrix:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4 or header[0] != "potts-coupling" or header[1] != "v1":
            raise CouplingError(f"bad header in coupling file {path}")
        n, nnz = int(header[2]), int(header[3])
        dense = np.zeros((n, n))
        count = 0
        for line in f:
            if not line.strip():
                continue
            i_s, j_s, v_s = line.split()
            i, j, v = int(i_s) - 1, int(j_s) - 1, float(v_s)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise CouplingError(f"bad entry indices in {path}: {line!r}")
            dense[i, j] = v
            dense[j, i] = v
            count += 1
    if count != nnz:
        raise CouplingError(f"expected {nnz} entries in {path}, found {count}")
    return _finalize(dense)
