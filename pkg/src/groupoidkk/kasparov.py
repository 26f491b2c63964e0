"""Finite-dimensional Kasparov (A, B)-modules.

A module is ``(E, pi, F)`` with ``E = E^0 + E^1`` a graded Hilbert module
over ``B``, ``pi`` an even representation of ``A`` and ``F`` an odd
operator.  Both graded pieces are presented inside standard modules; the
full module lives in ``B^(n0 + n1)`` with the even slots first, and every
operator is a flat matrix on that ambient module.

In finite dimensions ``pi(a)(F^2 - 1)`` and ``[pi(a), F]`` are always
compact, so those axioms hold automatically; they are still evaluated as
predicates.  The pairing of a ``(C, C)``-module is the index of the odd
corner ``F_+ : E^0 -> E^1``.  For a plain finite module this is
``dim E^0 - dim E^1``.  Modules produced by truncating differential
operators carry the truncation layer in ``boundary``, and their pairing
discards near-kernel vectors that live there.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import (CompactIdeal, HilbertModule, InnerTensor, ModuleMap, Representation,
                      _cpairs, _from_cpairs, _span, inner_tensor, outer_tensor)
from .matrix_algebra import MatrixAlgebra, TensorAlgebra, complex_numbers
from .wedderburn import K0Class, NotAHomomorphismError

DEGREE_TOL = 1e-8
DEGENERATE_TOL = 1e-10
PAIRING_REL_THRESHOLD = 1e-8
AMBIGUOUS_BAND = (1e-9, 1e-7)


class KasparovError(ValueError):
    pass


class AmbiguousPairingWarning(UserWarning):
    pass


@dataclass
class AxiomViolation:
    axiom: str
    detail: str
    witness: object = None

    def as_dict(self):
        return {"axiom": self.axiom, "detail": self.detail, "witness": self.witness}


# ---------------------------------------------------------------------------
# *-homomorphisms between matrix algebras


class AlgebraHomomorphism:
    """A linear map ``source -> target`` given by the images of the matrix units."""

    def __init__(self, source: MatrixAlgebra, target: MatrixAlgebra, images):
        images = np.asarray(images, dtype=complex)
        if images.shape != (source.dim, target.d, target.d):
            raise KasparovError("one target element per matrix unit of the source is required")
        self.source, self.target, self.images = source, target, images

    @classmethod
    def identity(cls, algebra: MatrixAlgebra) -> "AlgebraHomomorphism":
        return cls(algebra, algebra, algebra.basis)

    @classmethod
    def from_function(cls, source, target, fn) -> "AlgebraHomomorphism":
        return cls(source, target, np.array([fn(b) for b in source.basis]))

    @classmethod
    def corner(cls, n: int, i: int = 0) -> "AlgebraHomomorphism":
        """``C -> M_n``, ``1 -> e_ii``."""
        e = np.zeros((1, n, n), dtype=complex)
        e[0, i, i] = 1
        return cls(complex_numbers(), MatrixAlgebra([n]), e)

    def __call__(self, a):
        return np.tensordot(self.source.coords(a), self.images, axes=1)

    def compose(self, after: "AlgebraHomomorphism") -> "AlgebraHomomorphism":
        """``after o self``."""
        return AlgebraHomomorphism(self.source, after.target, np.array([after(m) for m in self.images]))

    def defect(self) -> float:
        a, im = self.source, self.images
        worst = 0.0
        for p, bp in enumerate(a.basis):
            worst = max(worst, float(np.abs(self(bp.conj().T) - im[p].conj().T).max()))
            for q, bq in enumerate(a.basis):
                worst = max(worst, float(np.abs(self(bp @ bq) - im[p] @ im[q]).max()))
        return worst

    def check(self, tol=1e-8):
        d = self.defect()
        if d > tol:
            raise NotAHomomorphismError(f"map is not a *-homomorphism (defect {d:.3g})", d)
        return self

    def is_unital(self, tol=1e-10) -> bool:
        return np.allclose(self(self.source.unit()), self.target.unit(), atol=tol)


# ---------------------------------------------------------------------------
# the module type


def _block_embed(basis, offset, total):
    out = np.zeros((total, basis.shape[1]), dtype=complex)
    out[offset:offset + basis.shape[0]] = basis
    return out


class KasparovModule:
    def __init__(self, algebra: MatrixAlgebra, even: HilbertModule, odd: HilbertModule,
                 pi_images, F, boundary=None):
        if even.algebra != odd.algebra:
            raise KasparovError("graded pieces are modules over different algebras")
        self.algebra = algebra
        self.even, self.odd = even, odd
        self.module = even.direct_sum(odd)
        n = self.module.ambient_dim
        pi_images = np.asarray(pi_images, dtype=complex)
        F = np.asarray(F, dtype=complex)
        if pi_images.shape != (algebra.dim, n, n) or F.shape != (n, n):
            raise KasparovError("representation and operator must act on the ambient graded module")
        p = self.module.projection
        self.pi = Representation(algebra, self.module, pi_images)
        self.F = p @ F @ p
        self.boundary = None if boundary is None else np.asarray(boundary, dtype=float)

    # -- structure -------------------------------------------------------------

    @property
    def coefficients(self) -> MatrixAlgebra:
        return self.even.algebra

    @property
    def n_even(self) -> int:
        return self.even.ambient_dim

    @property
    def grading(self) -> np.ndarray:
        g = np.ones(self.module.ambient_dim)
        g[self.n_even:] = -1
        return np.diag(g)

    def even_basis(self):
        return _block_embed(self.even.basis, 0, self.module.ambient_dim)

    def odd_basis(self):
        return _block_embed(self.odd.basis, self.n_even, self.module.ambient_dim)

    def block(self, mat, i, j):
        """The ``(i, j)`` parity block of a flat ambient matrix (0 even, 1 odd)."""
        s = [slice(0, self.n_even), slice(self.n_even, None)]
        return mat[s[i], s[j]]

    def F_plus(self):
        return self.block(self.F, 1, 0)

    def unit_image(self):
        return self.pi(self.algebra.unit())

    def as_map(self, mat) -> ModuleMap:
        return ModuleMap(self.module, self.module, mat, check=False)

    def __repr__(self):
        return (f"KasparovModule(A={self.algebra!r}, B={self.coefficients!r}, "
                f"dim E0={self.even.dim}, dim E1={self.odd.dim})")

    # -- constructors ------------------------------------------------------------

    @classmethod
    def from_parts(cls, algebra, even, odd, pi_even=None, pi_odd=None, f_plus=None, f_minus=None,
                   boundary=None) -> "KasparovModule":
        """Assemble from parity blocks.  ``pi_*`` are per-matrix-unit flat images on
        each piece (default: zero), ``f_plus: E0 -> E1`` and ``f_minus`` defaults to ``f_plus^*``."""
        n0, n1 = even.ambient_dim, odd.ambient_dim
        n = n0 + n1
        pis = np.zeros((algebra.dim, n, n), dtype=complex)
        if pi_even is not None:
            pis[:, :n0, :n0] = pi_even
        if pi_odd is not None:
            pis[:, n0:, n0:] = pi_odd
        F = np.zeros((n, n), dtype=complex)
        if f_plus is not None and np.size(f_plus):
            fp = np.asarray(f_plus, dtype=complex)
            F[n0:, :n0] = fp
            F[:n0, n0:] = fp.conj().T if f_minus is None else f_minus
        return cls(algebra, even, odd, pis, F, boundary)

    @classmethod
    def trivial(cls, p: int, q: int) -> "KasparovModule":
        """``(C^p + C^q, 1, 0)`` over ``(C, C)``."""
        c = complex_numbers()
        even = HilbertModule.standard(c, p) if p else HilbertModule.zero(c)
        odd = HilbertModule.standard(c, q) if q else HilbertModule.zero(c)
        return cls.from_parts(c, even, odd, even.projection[None], odd.projection[None])

    @classmethod
    def zero(cls, algebra=None, coefficients=None) -> "KasparovModule":
        a = algebra or complex_numbers()
        b = coefficients or complex_numbers()
        z = HilbertModule.zero(b)
        return cls.from_parts(a, z, z)

    @classmethod
    def from_homomorphism(cls, g: AlgebraHomomorphism) -> "KasparovModule":
        """``(C, g, 0)`` over ``(B, C)``: the target algebra as a module over itself."""
        c1 = HilbertModule.standard(g.target, 1)
        rep = Representation.from_function(g.source, c1, lambda b: _left_mult_flat(g.target, g(b)))
        return cls.from_parts(g.source, c1, HilbertModule.zero(g.target), rep.images)

    # -- serialization -----------------------------------------------------------

    def to_dict(self):
        return {
            "A": list(self.algebra.blocks),
            "even": self.even.to_dict(),
            "odd": self.odd.to_dict(),
            "pi": [_cpairs(m) for m in self.pi.images],
            "F": _cpairs(self.F),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "KasparovModule":
        a = MatrixAlgebra(data["A"])
        return cls(a, HilbertModule.from_dict(data["even"]), HilbertModule.from_dict(data["odd"]),
                   np.array([_from_cpairs(m) for m in data["pi"]], dtype=complex).reshape(
                       a.dim, *np.shape(data["F"])[:2]),
                   np.array(_from_cpairs(data["F"]), dtype=complex))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _left_mult_flat(algebra: MatrixAlgebra, a):
    """Flat matrix of ``x -> a x`` on ``A^1``."""
    return algebra.coords(np.einsum("ab,pbc->pac", a, algebra.basis)).T


# ---------------------------------------------------------------------------
# axioms


def validate_module(m: KasparovModule, tol: float = DEGREE_TOL) -> list[AxiomViolation]:
    out = []
    g = m.grading
    scale = max(1.0, float(np.abs(m.F).max(initial=0.0)))
    for c, img in enumerate(m.pi.images):
        odd_part = np.abs(img - g @ img @ g).max(initial=0.0) / 2
        if odd_part > tol:
            out.append(AxiomViolation("pi-degree", f"pi(e_{c}) has an odd part of size {odd_part:.3g}",
                                      {"matrix_unit": c}))
    for i in (0, 1):
        blk = m.block(m.F, i, i)
        size = float(np.abs(blk).max(initial=0.0))
        if size > tol * scale:
            name = "even-even" if i == 0 else "odd-odd"
            out.append(AxiomViolation("F-degree", f"F has a nonzero {name} block ({size:.3g})",
                                      {"block": name}))
    d = m.pi.homomorphism_defect()
    if d > tol:
        out.append(AxiomViolation("pi-homomorphism", f"defect {d:.3g}"))
    lin = max([m.as_map(img).linearity_defect()[0] for img in m.pi.images] + [0.0])
    if lin > tol * scale:
        out.append(AxiomViolation("pi-linearity", f"pi does not commute with the right action ({lin:.3g})"))
    dF, wit = m.as_map(m.F).linearity_defect()
    if dF > tol * scale:
        out.append(AxiomViolation("F-linearity", f"F does not commute with the right action ({dF:.3g})", wit))
    ideal = CompactIdeal(m.module)
    one = m.module.projection
    for c, img in enumerate(m.pi.images):
        if m.as_map(img @ (m.F @ m.F - one)) not in ideal:
            out.append(AxiomViolation("compact-F2", "pi(a)(F^2 - 1) is not compact", {"matrix_unit": c}))
        if m.as_map(img @ m.F - m.F @ img) not in ideal:
            out.append(AxiomViolation("compact-commutator", "[pi(a), F] is not compact", {"matrix_unit": c}))
    return out


def is_valid(m: KasparovModule) -> bool:
    return not validate_module(m)


@dataclass
class DegeneracyVerdict:
    degenerate: bool
    witness: dict | None


def is_degenerate(m: KasparovModule, tol: float = DEGENERATE_TOL) -> DegeneracyVerdict:
    """True iff ``pi(a)(F^2 - 1) = 0`` and ``[pi(a), F] = 0`` on the matrix units."""
    one = m.module.projection
    f2 = m.F @ m.F - one
    worst = None
    for c, img in enumerate(m.pi.images):
        for kind, val in (("F^2-1", img @ f2), ("commutator", img @ m.F - m.F @ img)):
            size = float(np.abs(val).max(initial=0.0))
            if size > tol and (worst is None or size > worst["defect"]):
                worst = {"matrix_unit": c, "kind": kind, "defect": size}
    return DegeneracyVerdict(worst is None, worst)


# ---------------------------------------------------------------------------
# sums, opposites, homomorphism classes


def _same_algebras(m1, m2):
    if m1.algebra != m2.algebra or m1.coefficients != m2.coefficients:
        raise KasparovError("modules are over different algebras")


def _regroup(mats, n0a, n1a, n0b, n1b):
    """Reorder ``(E0a + E1a) + (E0b + E1b)`` to ``(E0a + E0b) + (E1a + E1b)``."""
    order = np.concatenate([np.arange(n0a), n0a + n1a + np.arange(n0b),
                            n0a + np.arange(n1a), n0a + n1a + n0b + np.arange(n1b)])
    return mats[..., order[:, None], order[None, :]], order


def direct_sum(m1: KasparovModule, m2: KasparovModule) -> KasparovModule:
    _same_algebras(m1, m2)
    n1, n2 = m1.module.ambient_dim, m2.module.ambient_dim
    pis = np.zeros((m1.algebra.dim, n1 + n2, n1 + n2), dtype=complex)
    pis[:, :n1, :n1] = m1.pi.images
    pis[:, n1:, n1:] = m2.pi.images
    F = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    F[:n1, :n1] = m1.F
    F[n1:, n1:] = m2.F
    a0, a1 = m1.n_even, n1 - m1.n_even
    b0, b1 = m2.n_even, n2 - m2.n_even
    pis, order = _regroup(pis, a0, a1, b0, b1)
    F, _ = _regroup(F, a0, a1, b0, b1)
    boundary = None
    if m1.boundary is not None or m2.boundary is not None:
        bd1 = m1.boundary if m1.boundary is not None else np.zeros(n1)
        bd2 = m2.boundary if m2.boundary is not None else np.zeros(n2)
        boundary = np.concatenate([bd1, bd2])[order]
    return KasparovModule(m1.algebra, m1.even.direct_sum(m2.even), m1.odd.direct_sum(m2.odd),
                          pis, F, boundary)


def opposite(m: KasparovModule) -> KasparovModule:
    """``(E^op, pi, -F)``: grading swapped, operator negated."""
    n0 = m.n_even
    n = m.module.ambient_dim
    order = np.concatenate([np.arange(n0, n), np.arange(n0)])
    pis = m.pi.images[:, order[:, None], order[None, :]]
    F = -m.F[order[:, None], order[None, :]]
    bd = None if m.boundary is None else m.boundary[order]
    return KasparovModule(m.algebra, m.odd, m.even, pis, F, bd)


def pullback(m: KasparovModule, f: AlgebraHomomorphism) -> KasparovModule:
    """``(E, pi o f, F)`` over ``(C, B)`` for ``f: C -> A``."""
    if f.target != m.algebra:
        raise KasparovError("homomorphism does not land in the represented algebra")
    f.check()
    imgs = np.array([m.pi(f(b)) for b in f.source.basis])
    return KasparovModule(f.source, m.even, m.odd, imgs, m.F, m.boundary)


def _lift_left(c, src: InnerTensor, dst: InnerTensor):
    """``X (x) 1`` between two interior tensor products with the same right factor."""
    return dst.xi @ np.kron(c, np.eye(src.right.dim)) @ src._xi_pinv


def _lift_right(c, src: InnerTensor, dst: InnerTensor):
    """``1 (x) S`` between two interior tensor products with the same left factor."""
    return dst.xi @ np.kron(np.eye(src.left.dim), c) @ src._xi_pinv


def _compress(mat, q_dst, q_src):
    return q_dst.conj().T @ mat @ q_src


@dataclass
class TensorProvenance:
    pieces: tuple   # InnerTensor for the even and odd pieces


def product_right(m: KasparovModule, n: KasparovModule) -> KasparovModule:
    """``m (x)_B n`` for ``n = (E', pi', 0)`` over ``(B, C)`` with ``E'`` purely even.

    The product is ``(E (x)_{pi'} E', pi (x) 1, F (x) 1)``; with ``F' = 0``
    this is an honest Kasparov product.
    """
    if n.algebra != m.coefficients:
        raise KasparovError("the right factor does not represent the coefficient algebra")
    if n.odd.dim or np.abs(n.F).max(initial=0.0) > DEGENERATE_TOL:
        raise KasparovError("only right factors of the form (E, pi, 0) with E even are supported")
    rep = Representation(n.algebra, n.even, n.pi.images[:, :n.n_even, :n.n_even])
    pieces = (inner_tensor(m.even, n.even, rep), inner_tensor(m.odd, n.even, rep))
    qs = (m.even_basis(), m.odd_basis())
    n0 = pieces[0].module.ambient_dim
    n_tot = n0 + pieces[1].module.ambient_dim
    sl = (slice(0, n0), slice(n0, n_tot))

    def lift(mat):
        out = np.zeros((n_tot, n_tot), dtype=complex)
        for i in (0, 1):
            for j in (0, 1):
                c = _compress(mat, qs[i], qs[j])
                if c.size:
                    out[sl[i], sl[j]] = _lift_left(c, pieces[j], pieces[i])
        return out

    pis = np.array([lift(img) for img in m.pi.images]).reshape(m.algebra.dim, n_tot, n_tot)
    out = KasparovModule(m.algebra, pieces[0].module, pieces[1].module, pis, lift(m.F))
    out.provenance = TensorProvenance(pieces)
    return out


def pushforward(m: KasparovModule, g: AlgebraHomomorphism) -> KasparovModule:
    """``g_*(m) = (E (x)_g C, pi (x) 1, F (x) 1)`` for ``g: B -> C``."""
    if g.source != m.coefficients:
        raise KasparovError("homomorphism is not defined on the coefficient algebra")
    g.check()
    return product_right(m, KasparovModule.from_homomorphism(g))


def unit_embedding(m: KasparovModule, pushed: KasparovModule) -> np.ndarray:
    """Flat matrix of ``x -> x (x) 1`` from ``m`` to ``pushforward(m, g)`` for unital ``g``."""
    pieces = pushed.provenance.pieces
    right = pieces[0].right
    one = np.zeros((right.n, right.algebra.d, right.algebra.d), dtype=complex)
    one[0] = right.algebra.unit()
    n_out = pushed.module.ambient_dim
    n0_out = pushed.n_even
    u = np.zeros((n_out, m.module.ambient_dim), dtype=complex)
    for i, (piece, q, off) in enumerate(zip(pieces, (m.even, m.odd), (0, n0_out))):
        off_in = 0 if i == 0 else m.n_even
        for k in range(q.dim):
            x = q.element_of_basis(k)
            img = piece.module.flatten(piece.tensor(x, one))
            u[off:off + len(img), off_in:off_in + q.ambient_dim] += np.outer(img, q.basis[:, k].conj())
    return u


def equivalence_defect(m1: KasparovModule, m2: KasparovModule, u) -> float:
    """How far ``u: E1 -> E2`` is from an even unitary intertwining ``pi`` and ``F``."""
    u = np.asarray(u)
    p1, p2 = m1.module.projection, m2.module.projection
    uh = u.conj().T
    terms = [np.abs(uh @ u - p1).max(initial=0.0), np.abs(u @ uh - p2).max(initial=0.0),
             np.abs(m2.grading @ u - u @ m1.grading).max(initial=0.0),
             np.abs(u @ m1.F @ uh - m2.F).max(initial=0.0)]
    for a, b in zip(m1.pi.images, m2.pi.images):
        terms.append(np.abs(u @ a @ uh - b).max(initial=0.0))
    return float(max(terms))


def invariant_data(m: KasparovModule, decimals: int = 8) -> dict:
    """Unitary invariants: dimension vectors and the spectra of ``F`` and ``pi``."""
    q0, q1 = m.even_basis(), m.odd_basis()
    fp = _compress(m.F, q1, q0)
    sv = np.linalg.svd(fp, compute_uv=False) if fp.size else np.zeros(0)
    pis = []
    for img in m.pi.images:
        c = _compress(img, np.hstack([q0, q1]), np.hstack([q0, q1]))
        pis.append(np.round(np.sort(np.abs(np.linalg.eigvals(c))) if c.size else np.zeros(0), decimals).tolist())
    return {
        "even_dims": m.even.dimension_vector(),
        "odd_dims": m.odd.dimension_vector(),
        "F_plus_singular_values": np.round(np.sort(sv), decimals).tolist(),
        "pi_spectra": pis,
    }


def suspension(m: KasparovModule, D: MatrixAlgebra) -> KasparovModule:
    """``tau_D(m) = (E (x) D, pi (x) 1, F (x) 1)`` over ``(A (x) D, B (x) D)``."""
    d1 = HilbertModule.standard(D, 1)
    pieces = (outer_tensor(m.even, d1), outer_tensor(m.odd, d1))
    a_alg = TensorAlgebra(m.algebra, D)
    n0 = pieces[0].module.ambient_dim
    n_tot = n0 + pieces[1].module.ambient_dim
    sl = (slice(0, n0), slice(n0, n_tot))
    srcs = (m.even, m.odd)
    offs = (0, m.n_even)

    def lift(mat, d_elem):
        out = np.zeros((n_tot, n_tot), dtype=complex)
        for i in (0, 1):
            for j in (0, 1):
                blk = mat[offs[i]:offs[i] + srcs[i].ambient_dim, offs[j]:offs[j] + srcs[j].ambient_dim]
                if not blk.size or not np.abs(blk).max() > 0:
                    continue
                ent_s = _entries(blk, srcs[j], srcs[i])
                n_i, n_j = srcs[i].n, srcs[j].n
                ent = np.zeros((n_i, n_j, pieces[0].algebra.d, pieces[0].algebra.d), dtype=complex)
                for r in range(n_i):
                    for s in range(n_j):
                        ent[r, s] = pieces[0].algebra.kron(ent_s[r, s], d_elem)
                mp = ModuleMap.from_entries(pieces[j].module, pieces[i].module, ent, check=False)
                out[sl[i], sl[j]] = mp.matrix
        return out

    one_d = D.unit()
    # matrix units of A (x) D are the images of pairs of matrix units
    lookup = {}
    for ca, ea in enumerate(m.algebra.basis):
        for cd, ed in enumerate(D.basis):
            idx = int(np.argmax(np.abs(a_alg.coords(a_alg.kron(ea, ed)))))
            lookup[idx] = (ca, ed)
    pis = np.zeros((a_alg.dim, n_tot, n_tot), dtype=complex)
    for idx, (ca, ed) in lookup.items():
        pis[idx] = lift(m.pi.images[ca], ed)
    return KasparovModule(a_alg, pieces[0].module, pieces[1].module, pis, lift(m.F, one_d))


def _entries(block, src: HilbertModule, dst: HilbertModule):
    """Matrix over ``B`` of an A-linear flat block ``src -> dst``."""
    b = src.algebra
    out = np.zeros((dst.n, src.n, b.d, b.d), dtype=complex)
    for k in range(src.n):
        e = np.zeros((src.n, b.d, b.d), dtype=complex)
        e[k] = b.unit()
        out[:, k] = dst.unflatten(block @ src.flatten(e))
    return out


# ---------------------------------------------------------------------------
# K-theory


def _minimal_row_module(B: MatrixAlgebra, block: int, copies: int) -> HilbertModule:
    if copies == 0:
        return HilbertModule.zero(B)
    e = np.zeros((B.d, B.d), dtype=complex)
    o = B.offsets[block]
    e[o, o] = 1
    gens = np.zeros((copies, copies, B.d, B.d), dtype=complex)
    for i in range(copies):
        gens[i, i] = e
    return HilbertModule(B, copies, gens)


def _sum_modules(B, parts):
    parts = [p for p in parts if p.dim]
    if not parts:
        return HilbertModule.zero(B)
    out = parts[0]
    for p in parts[1:]:
        out = out.direct_sum(p)
    return out


def k0_to_kk(cls: K0Class, B: MatrixAlgebra) -> KasparovModule:
    """``(P_+ + P_-, 1, 0)`` over ``(C, B)`` with ``[P_+] - [P_-] = cls``."""
    dims = cls.as_list()
    if len(dims) != len(B.blocks):
        raise KasparovError("class has the wrong number of entries for the algebra")
    even = _sum_modules(B, [_minimal_row_module(B, b, max(v, 0)) for b, v in enumerate(dims)])
    odd = _sum_modules(B, [_minimal_row_module(B, b, max(-v, 0)) for b, v in enumerate(dims)])
    return KasparovModule.from_parts(complex_numbers(), even, odd,
                                     even.projection[None], odd.projection[None])


def _essential_corner(m: KasparovModule):
    """Odd corner of ``F`` compressed to ``pi(1)E``, with the bases used."""
    p = m.unit_image()
    q0 = _span(p @ m.even_basis())
    q1 = _span(p @ m.odd_basis())
    return q1.conj().T @ m.F @ q0, q0, q1


def kk_to_k0(m: KasparovModule, tol: float = PAIRING_REL_THRESHOLD) -> K0Class:
    """``[ker F_+] - [coker F_+]`` as a dimension vector over ``B``."""
    if m.algebra.blocks != (1,):
        raise KasparovError("kk_to_k0 needs a module over (C, B)")
    fp, q0, q1 = _essential_corner(m)
    B = m.coefficients
    n = m.module.n
    kern, coker = _kernel_bases(fp, tol)
    k = HilbertModule.from_flat(B, n, q0 @ kern) if kern.shape[1] else HilbertModule.zero(B, n)
    c = HilbertModule.from_flat(B, n, q1 @ coker) if coker.shape[1] else HilbertModule.zero(B, n)
    return K0Class(tuple(a - b for a, b in zip(k.dimension_vector(), c.dimension_vector())))


def _kernel_bases(fp, tol):
    r0, r1 = fp.shape[1], fp.shape[0]
    if fp.size == 0:
        return np.eye(r0, dtype=complex), np.eye(r1, dtype=complex)
    u, s, vh = np.linalg.svd(fp, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return vh[rank:].conj().T, u[:, rank:]


@dataclass
class KKPairingResult:
    value: int
    kernel_dims: list[int]
    cokernel_dims: list[int]
    ambiguous: bool = False
    candidates: tuple = ()
    gap_ratio: float | None = None

    def as_dict(self):
        return {"value": self.value, "kernel_dims": self.kernel_dims, "cokernel_dims": self.cokernel_dims,
                "ambiguous": self.ambiguous, "candidates": list(self.candidates),
                "gap_ratio": self.gap_ratio}


def pairing(m: KasparovModule, tol: float = PAIRING_REL_THRESHOLD) -> KKPairingResult:
    """Index of ``F_+`` on ``pi(1)E`` for a ``(C, C)``-module."""
    if m.algebra.blocks != (1,) or m.coefficients.blocks != (1,):
        raise KasparovError("the integer pairing is defined for (C, C)-modules")
    fp, q0, q1 = _essential_corner(m)
    if m.boundary is not None:
        from .index_lab.spectral import numerical_index
        bd = np.diag(m.boundary)
        b0 = q0.conj().T @ bd @ q0
        b1 = q1.conj().T @ bd @ q1
        rep = numerical_index(fp, domain_boundary=b0, codomain_boundary=b1)
        return KKPairingResult(rep.index, [rep.bulk_kernel], [rep.bulk_cokernel], not rep.reliable,
                               (rep.index, rep.raw_index), rep.gap_ratio)
    s = np.linalg.svd(fp, compute_uv=False) if fp.size else np.zeros(0)
    smax = float(s[0]) if len(s) else 0.0
    kern, coker = _kernel_bases(fp, tol)
    value = kern.shape[1] - coker.shape[1]
    ambiguous = False
    candidates = (value,)
    if smax > 0:
        rel = s / smax
        inside = (rel >= AMBIGUOUS_BAND[0]) & (rel <= AMBIGUOUS_BAND[1])
        if inside.any():
            ambiguous = True
            counts = []
            for cut in (AMBIGUOUS_BAND[0] / 2, AMBIGUOUS_BAND[1] * 2):
                k_, c_ = _kernel_bases(fp, cut)
                counts.append(k_.shape[1] - c_.shape[1])
            candidates = tuple(counts)
            warnings.warn(f"singular values inside the ambiguous band {AMBIGUOUS_BAND}; "
                          f"kernel counts give {candidates}", AmbiguousPairingWarning, stacklevel=2)
    return KKPairingResult(value, [kern.shape[1]], [coker.shape[1]], ambiguous, candidates)


# ---------------------------------------------------------------------------
# Morita elements and products with K-classes


def morita_elements(n: int):
    """``iota_n = (M_{1,n}, 1, 0)`` over ``(C, M_n)`` and ``jmath_n = (M_{n,1}, m, 0)`` over ``(M_n, C)``."""
    if n < 1:
        raise KasparovError("n must be positive")
    c, mn = complex_numbers(), MatrixAlgebra([n])
    row = np.zeros((1, 1, n, n), dtype=complex)
    row[0, 0, 0, 0] = 1
    e_row = HilbertModule(mn, 1, row)
    iota = KasparovModule.from_parts(c, e_row, HilbertModule.zero(mn), e_row.projection[None])
    col = HilbertModule.standard(c, n)
    rep = Representation.from_function(mn, col, lambda a: a)
    jmath = KasparovModule.from_parts(mn, col, HilbertModule.zero(c), rep.images)
    return iota, jmath


def projection_module(A: MatrixAlgebra, entries) -> HilbertModule:
    entries = np.asarray(entries, dtype=complex)
    if entries.ndim == 2:
        entries = entries[None, None]
    k = entries.shape[0]
    amb = HilbertModule.standard(A, k)
    pmap = ModuleMap.from_entries(amb, amb, entries)
    if not pmap.is_projection():
        raise KasparovError("presentation is not a projection")
    return HilbertModule(A, k, np.transpose(entries, (1, 0, 2, 3)))


def product_with_k_class(p, m: KasparovModule) -> KasparovModule:
    """``[P] (x)_A m = (P (x)_A E, 1 (x) pi, 1 (x) F)`` over ``(C, B)``.

    ``p`` is a projection in ``M_k(A)`` (entries of shape ``(k, k, d, d)`` or a
    ``d x d`` matrix when ``k = 1``) or a ``HilbertModule`` over ``A``.
    """
    A = m.algebra
    P = p if isinstance(p, HilbertModule) else projection_module(A, p)
    if P.algebra != A:
        raise KasparovError("projection lives over a different algebra")
    n0 = m.n_even
    rep0 = Representation(A, m.even, m.pi.images[:, :n0, :n0])
    rep1 = Representation(A, m.odd, m.pi.images[:, n0:, n0:])
    pieces = (inner_tensor(P, m.even, rep0), inner_tensor(P, m.odd, rep1))
    qs = (m.even.basis, m.odd.basis)
    offs = (slice(0, n0), slice(n0, None))
    a0 = pieces[0].module.ambient_dim
    n_tot = a0 + pieces[1].module.ambient_dim
    sl = (slice(0, a0), slice(a0, n_tot))
    F = np.zeros((n_tot, n_tot), dtype=complex)
    for i in (0, 1):
        for j in (0, 1):
            blk = m.F[offs[i], offs[j]]
            c = qs[i].conj().T @ blk @ qs[j]
            if c.size:
                F[sl[i], sl[j]] = _lift_right(c, pieces[j], pieces[i])
    even, odd = pieces[0].module, pieces[1].module
    pis = np.zeros((1, n_tot, n_tot), dtype=complex)
    pis[0, sl[0], sl[0]] = even.projection
    pis[0, sl[1], sl[1]] = odd.projection
    out = KasparovModule(complex_numbers(), even, odd, pis, F)
    out.provenance = TensorProvenance(pieces)
    return out


# ---------------------------------------------------------------------------
# operator normalisations and sampled homotopies


def self_adjointify(m: KasparovModule) -> KasparovModule:
    """Replace ``F`` by ``(F + F^*)/2``."""
    return KasparovModule(m.algebra, m.even, m.odd, m.pi.images, (m.F + m.F.conj().T) / 2, m.boundary)


def bounded_transform(m: KasparovModule) -> KasparovModule:
    """Replace ``F`` by ``F (1 + F^* F)^(-1/2)``; kernels are unchanged."""
    q = m.module.basis
    f = q.conj().T @ m.F @ q
    w, v = np.linalg.eigh(f.conj().T @ f + np.eye(f.shape[0]))
    root_inv = (v / np.sqrt(w)) @ v.conj().T
    return KasparovModule(m.algebra, m.even, m.odd, m.pi.images, q @ (f @ root_inv) @ q.conj().T, m.boundary)


def with_operator(m: KasparovModule, F) -> KasparovModule:
    return KasparovModule(m.algebra, m.even, m.odd, m.pi.images, F, m.boundary)


@dataclass
class HomotopyScan:
    samples: list[float]
    values: list[int]
    gap_ratios: list[float]
    gapped: bool
    constant: bool

    @property
    def verdict(self) -> bool:
        """Index constancy, asserted only when every sample is gapped."""
        return self.constant or not self.gapped


def homotopy_scan(m: KasparovModule, perturbation, samples: int = 11,
                  min_ratio: float = 1e2) -> HomotopyScan:
    """Pairings along ``F + s P`` for ``s`` in ``[0, 1]``."""
    ss = [float(s) for s in np.linspace(0.0, 1.0, samples)]
    vals, gaps = [], []
    for s in ss:
        ms = with_operator(m, m.F + s * np.asarray(perturbation))
        r = pairing(ms)
        vals.append(r.value)
        gaps.append(r.gap_ratio if r.gap_ratio is not None else _finite_gap(ms))
    gapped = all(g >= min_ratio for g in gaps)
    return HomotopyScan(ss, vals, gaps, gapped, len(set(vals)) == 1)


def _finite_gap(m: KasparovModule) -> float:
    from .index_lab.spectral import select_gap
    fp, _, _ = _essential_corner(m)
    if fp.size == 0:
        return float("inf")
    s = np.linalg.svd(fp, compute_uv=False)
    _, ratio, _ = select_gap(s[::-1], s[0])
    return ratio


def ladder_module(grid) -> KasparovModule:
    """``(C^N + C^N, 1, [[0, a^*], [a, 0]])`` for the discretized annihilator ``a``."""
    from .index_lab.discretize import annihilator
    op = annihilator(grid)
    c = complex_numbers()
    e = HilbertModule.standard(c, grid.N)
    bd = np.concatenate([op.domain_boundary, op.codomain_boundary]).astype(float)
    return KasparovModule.from_parts(c, e, e, e.projection[None], e.projection[None], op.matrix,
                                     boundary=bd)
