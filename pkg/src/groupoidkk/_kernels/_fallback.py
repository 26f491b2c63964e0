"""Numpy implementations of the table kernels, used when the extension is absent."""

import numpy as np


def associativity_violations(table, limit=64):
    found = []
    a_idx, b_idx = np.nonzero(table >= 0)
    for a, b in zip(a_idx, b_idx):
        ab = table[a, b]
        bc = table[b]
        cs = np.nonzero(bc >= 0)[0]
        left = table[ab, cs]
        right = table[a, bc[cs]]
        bad = cs[(left != right) | (left < 0)]
        for c in bad:
            found.append((a, b, c))
            if len(found) >= limit:
                return np.array(found, dtype=np.int64)
    return np.array(found, dtype=np.int64).reshape(-1, 3)


def convolve(f, g, table, inv, src, fiber_ptr, fiber_arrows, weight):
    m = table.shape[0]
    out = np.zeros(m, dtype=np.complex128)
    for gam in range(m):
        x = src[gam]
        etas = fiber_arrows[fiber_ptr[x]:fiber_ptr[x + 1]]
        out[gam] = np.sum(f[table[gam, inv[etas]]] * g[etas] * weight[etas])
    return out


def regular_matrix(f, fiber, table, inv, weight):
    root = np.sqrt(weight[fiber])
    prod = table[np.ix_(fiber, inv[fiber])]
    return root[:, None] * f[prod] * root[None, :]
