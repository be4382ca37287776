"""Numba kernel for single-site Gibbs dynamics.

The kernel consumes a pre-generated uniform stream (one draw per site
update), so all randomness lives in the caller's seeded generator and
sweep output is reproducible bit-for-bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def run_sweeps(indptr, indices, data, colors, m, beta, b_full,
               site_order, uniforms, n_sweeps, burn_in, thin, out):
    """Run ``n_sweeps + burn_in`` sweeps in place, storing kept sweeps.

    colors : int64[N], current configuration (mutated)
    m      : float64[N, q], local fields for ``colors`` (mutated)
    site_order : int64[n_total_sweeps, N] visit order per sweep
    uniforms   : float64[n_total_sweeps, N] one uniform per update
    out    : int64[n_kept, N]
    """
    n = colors.shape[0]
    q = m.shape[1]
    logits = np.empty(q)
    total = burn_in + n_sweeps
    kept = 0
    for sweep in range(total):
        for t in range(n):
            i = site_order[sweep, t]
            hi = 0.0
            for r in range(q):
                v = beta * m[i, r] + b_full[r]
                logits[r] = v
                if r == 0 or v > hi:
                    hi = v
            z = 0.0
            for r in range(q):
                logits[r] = np.exp(logits[r] - hi)
                z += logits[r]
            u = uniforms[sweep, t] * z
            acc = 0.0
            new = q - 1
            for r in range(q):
                acc += logits[r]
                if u < acc:
                    new = r
                    break
            old = colors[i]
            if new != old:
                colors[i] = new
                for k in range(indptr[i], indptr[i + 1]):
                    j = indices[k]
                    m[j, old] -= data[k]
                    m[j, new] += data[k]
        if sweep >= burn_in and (sweep - burn_in) % thin == 0:
            for t in range(n):
                out[kept, t] = colors[t]
            kept += 1
    return kept
