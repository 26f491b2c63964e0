"""Fredholm index of a truncated operator from its low singular spectrum.

The near-kernel is cut at the largest multiplicative gap among the
``n_small`` smallest singular values.  The empty-kernel candidate compares
the smallest singular value with the floor ``1e-8 * s_max``.  A square
truncation always has equal kernel and cokernel counts.  The continuum index
is recovered by discarding near-kernel vectors that live in the truncation
layer: the bulk count of a near-kernel subspace ``W`` is the number of
eigenvalues of ``W^* B W`` below 1/2, where ``B`` is the orthogonal projection
onto the boundary coordinates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscretizedOperator

N_SMALL = 8
MIN_GAP_RATIO = 1e2
KERNEL_FLOOR = 1e-8


class UnreliableIndexWarning(UserWarning):
    pass


@dataclass
class IndexReport:
    index: int
    kernel_dim: int
    cokernel_dim: int
    bulk_kernel: int
    bulk_cokernel: int
    gap_ratio: float
    threshold: float
    reliable: bool
    smallest: np.ndarray = field(repr=False)
    kernel_vectors: np.ndarray | None = field(default=None, repr=False)
    cokernel_vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def raw_index(self) -> int:
        """``dim ker - dim coker`` of the truncated matrix, without edge filtering."""
        return self.kernel_dim - self.cokernel_dim

    def as_dict(self):
        return {
            "index": self.index,
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "bulk_kernel": self.bulk_kernel,
            "bulk_cokernel": self.bulk_cokernel,
            "gap_ratio": self.gap_ratio,
            "threshold": self.threshold,
            "reliable": self.reliable,
        }


def _bulk_count(vectors, boundary):
    if vectors.shape[1] == 0:
        return 0
    if boundary is None:
        return vectors.shape[1]
    boundary = np.asarray(boundary)
    if boundary.ndim == 1:
        weighted = vectors.conj().T @ (boundary.astype(float)[:, None] * vectors)
    else:
        weighted = vectors.conj().T @ boundary @ vectors
    ev = np.linalg.eigvalsh((weighted + weighted.conj().T) / 2)
    return int(np.sum(ev < 0.5))


def select_gap(s_ascending, s_max, n_small=N_SMALL, floor=KERNEL_FLOOR):
    """Return ``(k, ratio, threshold)``: the near-kernel holds the ``k`` smallest values."""
    s = np.asarray(s_ascending, dtype=float)
    if s_max <= 0:
        return len(s), math.inf, 0.0
    base = floor * s_max
    cand = [s[0] / base if len(s) else math.inf]
    for k in range(1, min(n_small, len(s) - 1) + 1):
        cand.append(s[k] / s[k - 1] if s[k - 1] > 0 else math.inf)
    k = int(np.argmax(cand))
    lo = base if k == 0 else s[k - 1]
    hi = s[k] if k < len(s) else math.inf
    thr = math.sqrt(lo * hi) if math.isfinite(hi) and lo > 0 else (hi if k == 0 else 2 * lo)
    return k, float(cand[k]), float(thr)


def numerical_index(op, n_small: int = N_SMALL, min_ratio: float = MIN_GAP_RATIO,
                    domain_boundary=None, codomain_boundary=None,
                    keep_vectors: bool = False) -> IndexReport:
    """Index of a dense matrix or ``DiscretizedOperator`` with bulk/edge filtering.

    Boundaries given explicitly override those stored on the operator; they
    may be boolean masks or Hermitian weight matrices.
    """
    if isinstance(op, DiscretizedOperator):
        domain_boundary = op.domain_boundary if domain_boundary is None else domain_boundary
        codomain_boundary = op.codomain_boundary if codomain_boundary is None else codomain_boundary
        mat = op.matrix
    else:
        mat = np.asarray(op)
    m, n = mat.shape
    if min(m, n) == 0:
        return IndexReport(n - m, n, m, _bulk_count(np.eye(n), domain_boundary),
                           _bulk_count(np.eye(m), codomain_boundary), math.inf, 0.0, True, np.zeros(0))
    u, s, vh = np.linalg.svd(mat, full_matrices=True)
    s_asc = s[::-1]
    k, ratio, thr = select_gap(s_asc, s[0], n_small)
    rank = len(s) - k
    kern = vh[rank:].conj().T
    coker = u[:, rank:]
    reliable = ratio >= min_ratio
    bk, bc = _bulk_count(kern, domain_boundary), _bulk_count(coker, codomain_boundary)
    rep = IndexReport(bk - bc, kern.shape[1], coker.shape[1], bk, bc, ratio, thr, reliable,
                      s_asc[: n_small + 1].copy(),
                      kern if keep_vectors else None, coker if keep_vectors else None)
    if not reliable:
        warnings.warn(f"no singular-value gap of ratio {min_ratio:g} in the lowest {n_small} values "
                      f"(best {ratio:.3g}); kernel {rep.kernel_dim}, cokernel {rep.cokernel_dim}, "
                      f"bulk {bk} - {bc}", UnreliableIndexWarning, stacklevel=2)
    return rep
