"""Finite-dimensional C*-algebras ``M_{n_1} + ... + M_{n_r}`` as block-diagonal matrices."""

from __future__ import annotations

from functools import cached_property

import numpy as np


class MatrixAlgebra:
    """Direct sum of full matrix blocks, realised on ``C^d`` with ``d = sum(blocks)``.

    Elements are ``d x d`` block-diagonal complex matrices.  Coordinates of an
    element are its block entries in row-major order; the matrix units form an
    orthonormal basis for the trace inner product ``tr(a^* b)``.
    """

    def __init__(self, blocks):
        blocks = tuple(int(n) for n in blocks)
        if not blocks or min(blocks) < 1:
            raise ValueError("block sizes must be positive")
        self.blocks = blocks
        self.offsets = np.concatenate([[0], np.cumsum(blocks)]).astype(int)
        self.d = int(self.offsets[-1])
        self.dim = sum(n * n for n in blocks)

    def __repr__(self):
        return "MatrixAlgebra(" + " + ".join(f"M{n}" if n > 1 else "C" for n in self.blocks) + ")"

    def __eq__(self, other):
        return isinstance(other, MatrixAlgebra) and other.blocks == self.blocks

    def __hash__(self):
        return hash(self.blocks)

    @cached_property
    def mask(self):
        m = np.zeros((self.d, self.d), dtype=bool)
        for i, n in enumerate(self.blocks):
            o = self.offsets[i]
            m[o:o + n, o:o + n] = True
        return m

    def coords(self, a):
        return np.asarray(a)[..., self.mask]

    def element(self, v):
        v = np.asarray(v)
        a = np.zeros(v.shape[:-1] + (self.d, self.d), dtype=complex)
        a[..., self.mask] = v
        return a

    @cached_property
    def basis(self):
        """Matrix units, shape ``(dim, d, d)``."""
        return self.element(np.eye(self.dim))

    def unit(self):
        return np.eye(self.d, dtype=complex)

    def zero(self):
        return np.zeros((self.d, self.d), dtype=complex)

    def block(self, a, i):
        o, n = self.offsets[i], self.blocks[i]
        return np.asarray(a)[..., o:o + n, o:o + n]

    def from_blocks(self, parts):
        a = self.zero()
        for i, p in enumerate(parts):
            o, n = self.offsets[i], self.blocks[i]
            a[o:o + n, o:o + n] = p
        return a

    def central_projection(self, i):
        return self.from_blocks([np.eye(n) if j == i else np.zeros((n, n)) for j, n in enumerate(self.blocks)])

    def is_element(self, a, tol=1e-10):
        a = np.asarray(a)
        return a.shape == (self.d, self.d) and np.abs(a[~self.mask]).max(initial=0.0) <= tol

    def random(self, rng, hermitian=False):
        v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        a = self.element(v)
        return (a + a.conj().T) / 2 if hermitian else a

    def is_positive(self, a, tol=1e-10):
        a = np.asarray(a)
        if np.abs(a - a.conj().T).max(initial=0.0) > tol * max(1.0, np.abs(a).max(initial=0.0)):
            return False
        return np.linalg.eigvalsh((a + a.conj().T) / 2).min() >= -tol

    @staticmethod
    def norm(a):
        return float(np.linalg.norm(a, 2)) if np.size(a) else 0.0

    # -- tensor products ----------------------------------------------------

    def tensor(self, other: "MatrixAlgebra") -> "TensorAlgebra":
        return TensorAlgebra(self, other)


class TensorAlgebra(MatrixAlgebra):
    """``A (x) B`` with blocks ``n_i m_j`` ordered lexicographically in ``(i, j)``."""

    def __init__(self, left: MatrixAlgebra, right: MatrixAlgebra):
        super().__init__([n * m for n in left.blocks for m in right.blocks])
        self.left, self.right = left, right
        perm = []
        for i, n in enumerate(left.blocks):
            for j, m in enumerate(right.blocks):
                for r in range(n):
                    for s in range(m):
                        perm.append((left.offsets[i] + r) * right.d + right.offsets[j] + s)
        self.perm = np.array(perm)

    def kron(self, a, b):
        k = np.kron(a, b)
        return k[np.ix_(self.perm, self.perm)]


def complex_numbers() -> MatrixAlgebra:
    return MatrixAlgebra([1])
