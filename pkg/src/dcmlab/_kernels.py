"""Compiled inner loops for the counter sweep.

The register propagation is a byte-wise max over every edge's register
row and the estimation pass is a table lookup over every register; both
are memory-bound loops that numba turns into SIMD code.  Kernels are
cached on disk so the compile cost is paid once per environment.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def propagate_max(offsets, targets, reg_in, reg_out):
    """reg_out[u] = max(reg_out[u], max over out-neighbors v of reg_in[v])."""
    n = offsets.size - 1
    m = reg_in.shape[1]
    for u in range(n):
        for e in range(offsets[u], offsets[u + 1]):
            v = targets[e]
            row_out = reg_out[u]
            row_in = reg_in[v]
            for r in range(m):
                if row_in[r] > row_out[r]:
                    row_out[r] = row_in[r]


@njit(cache=True)
def register_sums(reg, pow_table):
    """Per row: (sum over registers of 2^-value, count of zero registers)."""
    rows, m = reg.shape
    sums = np.empty(rows)
    zeros = np.empty(rows, dtype=np.int64)
    for i in range(rows):
        s = 0.0
        z = 0
        row = reg[i]
        for r in range(m):
            v = row[r]
            s += pow_table[v]
            if v == 0:
                z += 1
        sums[i] = s
        zeros[i] = z
    return sums, zeros
