"""Numerical block decomposition of finite-dimensional matrix *-algebras, and K_0.

Given a spanning set of a *-closed subalgebra of ``M_d``, ``decompose``
finds a unitary ``U`` such that ``U^* a U`` is block diagonal, each simple
summand ``M_n`` appearing as ``copies`` identical diagonal blocks.

Algorithm: a random self-adjoint central element separates the isotypic
components (eigenvalues clustered with an absolute gap of 1e-6 after
normalising the probe); a second central probe splits accidental
coincidences.  Inside an isotypic component a random self-adjoint algebra
element has ``n`` eigenvalues of multiplicity ``copies``; a random algebra
element transports the first eigenspace onto the others, which aligns the
copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix_algebra import MatrixAlgebra

CLUSTER_GAP = 1e-6
PROJECTION_TOL = 1e-8


class DecompositionError(ValueError):
    pass


class NotAHomomorphismError(ValueError):
    def __init__(self, message, max_defect):
        super().__init__(message)
        self.max_defect = max_defect


@dataclass
class Summand:
    size: int
    copies: int
    columns: np.ndarray  # indices into the intertwiner's columns, shape (copies, size)


@dataclass
class BlockDecomposition:
    summands: list[Summand]
    intertwiner: np.ndarray
    residual: float
    seed: int
    spanning: list[np.ndarray] = field(repr=False)
    null_dim: int = 0

    @property
    def sizes(self):
        return [s.size for s in self.summands]

    @property
    def blocks(self):
        """``[(size, multiplicity)]`` with multiplicity the number of summands of that size."""
        out = {}
        for s in self.summands:
            out[s.size] = out.get(s.size, 0) + 1
        return sorted(out.items())

    @property
    def dimension(self):
        return sum(s.size ** 2 for s in self.summands)

    @property
    def rep_dim(self):
        return self.intertwiner.shape[0]

    def algebra(self) -> MatrixAlgebra:
        return MatrixAlgebra(self.sizes)

    def block_of(self, a, i, copy=0):
        cols = self.summands[i].columns[copy]
        u = self.intertwiner[:, cols]
        return u.conj().T @ a @ u

    def to_blocks(self, a):
        return [self.block_of(a, i) for i in range(len(self.summands))]

    def from_blocks(self, parts):
        """Element of the original representation with the given summand blocks."""
        z = np.zeros((self.rep_dim, self.rep_dim), dtype=complex)
        for s, p in zip(self.summands, parts):
            for cols in s.columns:
                u = self.intertwiner[:, cols]
                z += u @ p @ u.conj().T
        return z

    def minimal_projection(self, i):
        parts = [np.zeros((s.size, s.size)) for s in self.summands]
        parts[i][0, 0] = 1
        return self.from_blocks(parts)

    def report(self):
        return {
            "blocks": [{"size": n, "multiplicity": m} for n, m in self.blocks],
            "k0_rank": len(self.summands),
            "residual": float(self.residual),
            "seed": int(self.seed),
        }


def _orthonormal_span(mats, tol=1e-10):
    flat = np.array([np.asarray(m, dtype=complex).reshape(-1) for m in mats])
    if flat.size == 0:
        return np.zeros((0, 0)), 0.0
    scale = max(np.linalg.norm(flat, axis=1).max(), 1e-300)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    r = int(np.sum(s > tol * scale * max(1.0, s[0] / scale)))
    return vh[:r], scale


def _clusters(values, gap=CLUSTER_GAP):
    order = np.argsort(values)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] > gap:
            groups.append(cur)
            cur = []
        cur.append(b)
    groups.append(cur)
    return groups


def _random_hermitian(basis_mats, rng):
    c = rng.standard_normal(len(basis_mats)) + 1j * rng.standard_normal(len(basis_mats))
    h = np.tensordot(c, basis_mats, axes=1)
    h = (h + h.conj().T) / 2
    n = np.linalg.norm(h, 2)
    return h / n if n > 0 else h


def _random_element(basis_mats, rng):
    c = rng.standard_normal(len(basis_mats)) + 1j * rng.standard_normal(len(basis_mats))
    return np.tensordot(c, basis_mats, axes=1)


def decompose(spanning, seed: int = 0, adjoint_tol: float = 1e-8) -> BlockDecomposition:
    spanning = [np.asarray(a, dtype=complex) for a in spanning]
    if not spanning:
        raise DecompositionError("empty spanning set")
    d = spanning[0].shape[0]
    rng = np.random.default_rng(seed)

    rows, scale = _orthonormal_span(spanning)
    basis = rows.reshape(-1, d, d)
    # adjoint closure
    for a in spanning:
        v = a.conj().T.reshape(-1)
        resid = np.linalg.norm(v - rows.T @ (rows.conj() @ v))
        if resid > adjoint_tol * scale:
            raise DecompositionError(f"spanning set is not closed under adjoint (defect {resid:.3g})")

    # centre: elements of the span commuting with three random self-adjoint elements
    probes = [_random_hermitian(basis, rng) for _ in range(3)]
    eqs = np.concatenate([
        np.array([(b @ h - h @ b).reshape(-1) for b in basis]).T for h in probes
    ])
    _, s, vh = np.linalg.svd(eqs, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * max(s[0] if len(s) else 1.0, 1.0)))
    centre_coeffs = vh[rank:].conj()
    centre = np.tensordot(centre_coeffs, basis, axes=1)

    # isotypic components from two central probes
    comps = [np.eye(d, dtype=complex)]
    for _ in range(2):
        z = _random_hermitian(centre, rng)
        nxt = []
        for q in comps:
            w, v = np.linalg.eigh(q.conj().T @ z @ q)
            for grp in _clusters(w):
                nxt.append(q @ v[:, grp])
        comps = nxt

    cols = []
    summands = []
    null_cols = []
    for q in comps:
        restricted = [q.conj().T @ b @ q for b in basis]
        r_rows, _ = _orthonormal_span(restricted, tol=1e-9)
        dim = r_rows.shape[0]
        if dim == 0 or max(np.linalg.norm(m) for m in restricted) < 1e-9:
            null_cols.append(q)
            continue
        n = int(round(np.sqrt(dim)))
        k = q.shape[1]
        if n * n != dim or k % n:
            raise DecompositionError(f"isotypic component of dimension {k} carries a {dim}-dimensional algebra")
        copies = k // n
        rbasis = r_rows.reshape(-1, k, k)
        aligned = _align_copies(rbasis, n, copies, rng)
        block = q @ aligned  # columns ordered copy-major
        summands.append((n, copies, block))

    # canonical summand order: size, then normalised traces of the spanning set
    keyed = []
    for n, copies, block in summands:
        u = block[:, :n]
        key = []
        for a in spanning:
            t = np.trace(u.conj().T @ a @ u) / n
            key += [round(t.real, 6), round(t.imag, 6)]
        keyed.append(((n, [-v for v in key]), n, copies, block))
    keyed.sort(key=lambda t: t[0])

    out_summands = []
    pos = 0
    for _, n, copies, block in keyed:
        idx = np.arange(pos, pos + n * copies).reshape(copies, n)
        out_summands.append(Summand(n, copies, idx))
        cols.append(block)
        pos += n * copies
    null_dim = 0
    for q in null_cols:
        cols.append(q)
        null_dim += q.shape[1]
    U = np.concatenate(cols, axis=1)

    dec = BlockDecomposition(out_summands, U, 0.0, seed, spanning, null_dim)
    dec.residual = _residual(dec, spanning, scale)
    return dec


def _align_copies(rbasis, n, copies, rng, attempts=8):
    """Orthonormal basis of ``C^k`` in which the algebra is ``M_n (x) 1_copies``, copy-major."""
    k = n * copies
    if n == 1:
        return np.eye(k, dtype=complex)
    for _ in range(attempts):
        h = _random_hermitian(rbasis, rng)
        w, v = np.linalg.eigh(h)
        groups = _clusters(w)
        if len(groups) != n or any(len(g) != copies for g in groups):
            continue
        spaces = [v[:, g] for g in groups]
        a = _random_element(rbasis, rng)
        frames = [spaces[0]]
        ok = True
        for sp in spaces[1:]:
            t = sp.conj().T @ a @ spaces[0]
            x, sv, yh = np.linalg.svd(t)
            if sv.min() < 1e-8 * max(sv.max(), 1e-300):
                ok = False
                break
            frames.append(sp @ (x @ yh))
        if not ok:
            continue
        out = np.zeros((k, k), dtype=complex)
        for r in range(copies):
            for i in range(n):
                out[:, r * n + i] = frames[i][:, r]
        return out
    raise DecompositionError("could not align copies of a simple summand")


def _residual(dec: BlockDecomposition, spanning, scale):
    U = dec.intertwiner
    worst = 0.0
    for a in spanning:
        b = U.conj().T @ a @ U
        model = np.zeros_like(b)
        for s in dec.summands:
            first = b[np.ix_(s.columns[0], s.columns[0])]
            for c in s.columns:
                model[np.ix_(c, c)] = first
        worst = max(worst, float(np.linalg.norm(b - model, 2)))
    return worst / max(scale, 1e-300)


# ---------------------------------------------------------------------------
# K_0


@dataclass(frozen=True)
class K0Class:
    dims: tuple

    def __add__(self, other):
        return K0Class(tuple(a + b for a, b in zip(self.dims, other.dims)))

    def __sub__(self, other):
        return K0Class(tuple(a - b for a, b in zip(self.dims, other.dims)))

    def __neg__(self):
        return K0Class(tuple(-a for a in self.dims))

    def __iter__(self):
        return iter(self.dims)

    def as_list(self):
        return [int(v) for v in self.dims]


@dataclass
class K0Group:
    rank: int
    generators: list[K0Class]
    generator_projections: list[np.ndarray] = field(repr=False)
    block_sizes: list[int]

    def positive_cone(self):
        """The classes of honest projections: non-negative dimension vectors."""
        return "dimension vectors with non-negative entries"

    def report(self):
        return {
            "rank": self.rank,
            "generators": [g.as_list() for g in self.generators],
            "block_sizes": list(self.block_sizes),
            "positive_cone": self.positive_cone(),
        }


def k0(dec: BlockDecomposition) -> K0Group:
    r = len(dec.summands)
    gens = [K0Class(tuple(int(i == j) for j in range(r))) for i in range(r)]
    return K0Group(r, gens, [dec.minimal_projection(i) for i in range(r)], dec.sizes)


def _is_projection(p, tol):
    scale = max(1.0, np.linalg.norm(p, 2))
    return (np.linalg.norm(p @ p - p, 2) <= tol * scale and np.linalg.norm(p - p.conj().T, 2) <= tol * scale)


def k0_class_of_projection(p, dec: BlockDecomposition, tol: float = PROJECTION_TOL) -> K0Class:
    """Rank of ``p`` in each simple summand.  ``p`` lives in the decomposed representation."""
    p = np.asarray(p, dtype=complex)
    if not _is_projection(p, tol):
        raise DecompositionError("input is not a self-adjoint idempotent")
    dims = []
    for i in range(len(dec.summands)):
        blk = dec.block_of(p, i)
        dims.append(int(round(np.trace(blk).real)))
    return K0Class(tuple(dims))


def k0_class_of_matrix_projection(p, dec: BlockDecomposition, tol: float = PROJECTION_TOL) -> K0Class:
    """Class of a projection in ``M_k(A)``, given as a ``k x k`` array of algebra elements."""
    p = np.asarray(p, dtype=complex)
    k = p.shape[0]
    big = np.block([[p[i, j] for j in range(k)] for i in range(k)])
    if not _is_projection(big, tol):
        raise DecompositionError("input is not a self-adjoint idempotent")
    dims = []
    for i in range(len(dec.summands)):
        blk = np.block([[dec.block_of(p[a, b], i) for b in range(k)] for a in range(k)])
        dims.append(int(round(np.trace(blk).real)))
    return K0Class(tuple(dims))


# ---------------------------------------------------------------------------
# functoriality


class LinearExtension:
    """A linear map on the span of ``source.spanning`` given by images of the spanning set."""

    def __init__(self, source: BlockDecomposition, images):
        self.source = source
        self.images = [np.asarray(m, dtype=complex) for m in images]
        if len(self.images) != len(source.spanning):
            raise ValueError("need one image per spanning element")
        self._flat = np.array([a.reshape(-1) for a in source.spanning]).T
        self._img = np.array([m.reshape(-1) for m in self.images]).T
        self._shape = self.images[0].shape

    def __call__(self, a):
        c, *_ = np.linalg.lstsq(self._flat, np.asarray(a, dtype=complex).reshape(-1), rcond=None)
        return (self._img @ c).reshape(self._shape)

    def homomorphism_defect(self):
        sp = self.source.spanning
        scale = max(1.0, max(np.linalg.norm(m, 2) for m in self.images) ** 2)
        worst = 0.0
        for i, a in enumerate(sp):
            worst = max(worst, np.linalg.norm(self(a.conj().T) - self.images[i].conj().T, 2) / scale)
            for j, b in enumerate(sp):
                lhs = self(a @ b)
                rhs = self.images[i] @ self.images[j]
                worst = max(worst, np.linalg.norm(lhs - rhs, 2) / scale)
        return float(worst)


def induced_k0_map(source: BlockDecomposition, target: BlockDecomposition, images,
                   tol: float = PROJECTION_TOL) -> np.ndarray:
    """Integer matrix of ``phi_*`` on dimension vectors; ``images[i] = phi(source.spanning[i])``."""
    phi = LinearExtension(source, images)
    defect = phi.homomorphism_defect()
    if defect > tol:
        raise NotAHomomorphismError(f"map is not a *-homomorphism (defect {defect:.3g})", defect)
    cols = []
    for i in range(len(source.summands)):
        e = phi(source.minimal_projection(i))
        cols.append(k0_class_of_projection(e, target, tol=max(tol, 1e-7)).as_list())
    return np.array(cols, dtype=np.int64).T.reshape(len(target.summands), len(source.summands))


# ---------------------------------------------------------------------------
# Morita comparison of a groupoid with a pullback


@dataclass
class MoritaReport:
    base_sizes: list[int]
    pulled_sizes: list[int]
    base_rank: int
    pulled_rank: int
    cover_degree: int | None
    sizes_scale: bool | None
    consistent: bool

    def as_dict(self):
        return {
            "base_blocks": self.base_sizes,
            "pullback_blocks": self.pulled_sizes,
            "base_k0_rank": self.base_rank,
            "pullback_k0_rank": self.pulled_rank,
            "cover_degree": self.cover_degree,
            "block_sizes_scale_by_degree": self.sizes_scale,
            "consistent": self.consistent,
        }


def morita_certificate(g, pulled, phi=None, seed: int = 0) -> MoritaReport:
    """Compare ``C*(g)`` with ``C*`` of a pullback of ``g``: equal K_0 rank, block sizes scaled."""
    from .convolution import algebra_image

    dg = decompose(algebra_image(g), seed=seed)
    dh = decompose(algebra_image(pulled), seed=seed)
    degree = None
    scale_ok = None
    if phi is not None:
        counts = np.bincount(np.asarray(phi), minlength=g.n_units)
        if np.all(counts == counts[0]):
            degree = int(counts[0])
            scale_ok = sorted(degree * n for n in dg.sizes) == sorted(dh.sizes)
    consistent = len(dg.summands) == len(dh.summands) and scale_ok is not False
    return MoritaReport(dg.sizes, dh.sizes, len(dg.summands), len(dh.summands), degree, scale_ok, consistent)
