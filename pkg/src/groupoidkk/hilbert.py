"""Finitely generated Hilbert modules over finite-dimensional C*-algebras.

A module ``E`` over ``A = M_{n_1} + ... + M_{n_r}`` is presented inside the
standard module ``A^n`` by a list of generators.  Elements of ``A^n`` are
arrays of shape ``(n, d, d)`` with block-diagonal entries, and the
inner product is ``(x, y) = sum_i x_i^* y_i``.

Flat coordinates list the block entries of every slot, so that the trace
of ``(x, y)`` is the ordinary Hermitian product of flat vectors.  For a
right submodule the trace-orthogonal complement coincides with the
A-valued one, and every A-linear map is determined by its action on flat
coordinates.  The C*-norm of an A-linear map equals the spectral norm of
its flat matrix, which is what ``ModuleMap.norm`` reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .matrix_algebra import MatrixAlgebra, TensorAlgebra
from .wedderburn import NotAHomomorphismError

GRAM_TOL = 1e-10
KERNEL_TOL = 1e-8
LINEARITY_TOL = 1e-9


class ModuleError(ValueError):
    """Invalid module data; ``witness`` locates the offending element when known."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotLinearError(ModuleError):
    pass


class AdjointError(RuntimeError):
    """The adjoint system had no solution.  Cannot happen for finitely generated
    modules over finite-dimensional algebras, so this signals a bug."""


def _span(vectors, tol=GRAM_TOL):
    """Orthonormal basis (columns) of the column span of ``vectors``."""
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    scale = max(1.0, s[0]) if len(s) else 1.0
    return u[:, : int(np.sum(s > tol * scale))]


def _nullspace(mat, tol=GRAM_TOL):
    """Orthonormal basis of ``ker mat`` (columns)."""
    n = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    scale = max(1.0, s[0]) if len(s) else 1.0
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


class HilbertModule:
    """The right A-submodule of ``A^n`` generated by ``generators``."""

    def __init__(self, algebra: MatrixAlgebra, n: int, generators):
        self.algebra = algebra
        self.n = int(n)
        gens = np.asarray(generators, dtype=complex).reshape(-1, self.n, algebra.d, algebra.d)
        off = np.abs(gens[..., ~algebra.mask]).max(initial=0.0)
        if off > GRAM_TOL:
            raise ModuleError(f"generator entries leave the algebra (off-block mass {off:.3g})")
        self.generators = gens
        a = algebra
        # g * e for every generator g and matrix unit e spans E over C
        prods = np.einsum("kiab,ebc->keiac", gens, a.basis)
        flat = a.coords(prods).reshape(-1, self.ambient_dim).T
        self.basis = _span(flat)

    # -- construction --------------------------------------------------------

    @classmethod
    def standard(cls, algebra: MatrixAlgebra, n: int = 1) -> "HilbertModule":
        """``A^n`` with its canonical generators."""
        gens = np.zeros((n, n, algebra.d, algebra.d), dtype=complex)
        for i in range(n):
            gens[i, i] = algebra.unit()
        return cls(algebra, n, gens)

    @classmethod
    def from_flat(cls, algebra, n, columns) -> "HilbertModule":
        """Module generated over A by flat coordinate columns."""
        columns = np.asarray(columns, dtype=complex).reshape(n * algebra.dim, -1)
        return cls(algebra, n, algebra.element(columns.T.reshape(-1, n, algebra.dim)))

    @classmethod
    def zero(cls, algebra, n=1) -> "HilbertModule":
        return cls(algebra, n, np.zeros((0, n, algebra.d, algebra.d)))

    # -- coordinates -----------------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return self.n * self.algebra.dim

    @property
    def dim(self) -> int:
        """Complex dimension."""
        return self.basis.shape[1]

    def flatten(self, x):
        x = np.asarray(x)
        return self.algebra.coords(x).reshape(x.shape[:-3] + (self.ambient_dim,))

    def unflatten(self, v):
        v = np.asarray(v)
        return self.algebra.element(v.reshape(v.shape[:-1] + (self.n, self.algebra.dim)))

    @cached_property
    def projection(self):
        return self.basis @ self.basis.conj().T

    def contains(self, x, tol=1e-8) -> bool:
        v = self.flatten(x)
        return float(np.linalg.norm(v - self.projection @ v)) <= tol * max(1.0, float(np.linalg.norm(v)))

    def contains_module(self, other: "HilbertModule", tol=1e-8) -> bool:
        return (other.algebra == self.algebra and other.n == self.n
                and np.linalg.norm(other.basis - self.projection @ other.basis) <= tol * max(1, other.dim))

    def same_as(self, other: "HilbertModule", tol=1e-8) -> bool:
        return other.dim == self.dim and self.contains_module(other, tol)

    def element_of_basis(self, k):
        return self.unflatten(self.basis[:, k])

    def random_element(self, rng):
        if len(self.generators) == 0:
            return np.zeros((self.n, self.algebra.d, self.algebra.d), dtype=complex)
        coeffs = np.array([self.algebra.random(rng) for _ in self.generators])
        return np.einsum("kiab,kbc->iac", self.generators, coeffs)

    # -- inner product -------------------------------------------------------

    def inner(self, x, y):
        """``(x, y) = sum_i x_i^* y_i``; batched over leading axes of ``x`` and ``y``."""
        return np.einsum("...iba,...ibc->...ac", np.conj(x), y)

    def norm(self, x) -> float:
        return math.sqrt(max(MatrixAlgebra.norm(self.inner(x, x)), 0.0))

    def gram(self, vectors=None):
        """A-valued Gram matrix of ``vectors`` (default: the generators), shape ``(k, k, d, d)``."""
        v = self.generators if vectors is None else np.asarray(vectors)
        return np.einsum("kiba,libc->klac", np.conj(v), v)

    def cauchy_schwarz_margin(self, x, y) -> float:
        """Smallest eigenvalue of ``||x||^2 (y,y) - (x,y)^*(x,y)``; non-negative when the inequality holds."""
        xy = self.inner(x, y)
        m = self.norm(x) ** 2 * self.inner(y, y) - xy.conj().T @ xy
        return float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())

    def dimension_vector(self) -> list[int]:
        """Multiplicity of each simple module ``C^{n_b}`` of ``A`` in ``E``."""
        out = []
        for b, nb in enumerate(self.algebra.blocks):
            z = self.algebra.central_projection(b)
            r = right_multiplication(self.algebra, self.n, z)
            rank = _span(r @ self.basis).shape[1]
            out.append(int(round(rank / nb)))
        return out

    # -- derived modules -----------------------------------------------------

    def identity(self) -> "ModuleMap":
        return ModuleMap(self, self, self.projection)

    def direct_sum(self, other: "HilbertModule") -> "HilbertModule":
        if other.algebra != self.algebra:
            raise ModuleError("direct sum of modules over different algebras")
        d = self.algebra.d
        g1 = np.zeros((len(self.generators), self.n + other.n, d, d), dtype=complex)
        g2 = np.zeros((len(other.generators), self.n + other.n, d, d), dtype=complex)
        g1[:, : self.n] = self.generators
        g2[:, self.n:] = other.generators
        return HilbertModule(self.algebra, self.n + other.n, np.concatenate([g1, g2]))

    def submodule(self, vectors) -> "HilbertModule":
        vectors = np.asarray(vectors, dtype=complex).reshape(-1, self.n, self.algebra.d, self.algebra.d)
        for k, v in enumerate(vectors):
            if not self.contains(v):
                raise ModuleError("generator is not in the module", witness=k)
        return HilbertModule(self.algebra, self.n, vectors)

    def __repr__(self):
        return f"HilbertModule({self.algebra!r}, n={self.n}, dim={self.dim})"

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "blocks": list(self.algebra.blocks),
            "rank": self.n,
            "generators": [[_cpairs(m) for m in g] for g in self.generators],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        a = MatrixAlgebra(data["blocks"])
        gens = np.array([[_from_cpairs(m) for m in g] for g in data["generators"]], dtype=complex)
        return cls(a, data["rank"], gens.reshape(-1, data["rank"], a.d, a.d))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _cpairs(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _from_cpairs(rows):
    return [[complex(re, im) for re, im in row] for row in rows]


_RIGHT_CACHE: dict = {}


def _right_unit_matrices(algebra: MatrixAlgebra):
    """``r[c]`` is the matrix of ``y -> y e_c`` on coordinates of A."""
    key = algebra.blocks
    if key not in _RIGHT_CACHE:
        b = algebra.basis
        _RIGHT_CACHE[key] = np.transpose(algebra.coords(np.einsum("pab,qbc->qpac", b, b)), (0, 2, 1))
    return _RIGHT_CACHE[key]


def right_multiplication(algebra: MatrixAlgebra, n: int, a):
    """Flat matrix of ``x -> x a`` on ``A^n``."""
    r = np.tensordot(algebra.coords(a), _right_unit_matrices(algebra), axes=1)
    return np.kron(np.eye(n), r)


# ---------------------------------------------------------------------------
# module maps


class ModuleMap:
    """An A-linear map ``source -> target`` given by a flat matrix on the ambient modules.

    The stored matrix is compressed to the source module, so it vanishes on
    the complement of ``source``.
    """

    def __init__(self, source: HilbertModule, target: HilbertModule, matrix, check=True):
        if source.algebra != target.algebra:
            raise ModuleError("source and target are modules over different algebras")
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (target.ambient_dim, source.ambient_dim):
            raise ModuleError(f"matrix shape {matrix.shape} does not match ambient "
                              f"dimensions {(target.ambient_dim, source.ambient_dim)}")
        self.source, self.target = source, target
        self.matrix = matrix @ source.projection
        self._adjoint = None
        if check:
            self._check()

    def _check(self):
        img = self.matrix @ self.source.basis
        leak = img - self.target.projection @ img
        if leak.size and np.abs(leak).max() > LINEARITY_TOL * max(1.0, np.abs(img).max()):
            k = int(np.argmax(np.linalg.norm(leak, axis=0)))
            raise ModuleError("map leaves the target module", witness={"basis_vector": k})
        defect, witness = self.linearity_defect()
        if defect > LINEARITY_TOL * max(1.0, self.norm()):
            raise NotLinearError(f"map is not A-linear (defect {defect:.3g})", witness=witness)

    @classmethod
    def from_entries(cls, source, target, entries, check=True) -> "ModuleMap":
        """The map ``(Tx)_i = sum_j T_ij x_j`` for a ``target.n x source.n`` matrix over A."""
        a = source.algebra
        entries = np.asarray(entries, dtype=complex).reshape(target.n, source.n, a.d, a.d)
        probes = source.unflatten(np.eye(source.ambient_dim))
        img = np.einsum("ijab,pjbc->piac", entries, probes)
        return cls(source, target, target.flatten(img).T, check=check)

    def linearity_defect(self):
        """``max ||T(u e) - T(u) e||`` over basis vectors ``u`` and matrix units ``e``."""
        a = self.source.algebra
        r = _right_unit_matrices(a)
        q = self.source.basis
        worst, witness = 0.0, None
        for c in range(a.dim):
            rs = np.kron(np.eye(self.source.n), r[c])
            rt = np.kron(np.eye(self.target.n), r[c])
            diff = self.matrix @ (rs @ q) - rt @ (self.matrix @ q)
            if diff.size:
                k = int(np.argmax(np.linalg.norm(diff, axis=0)))
                val = float(np.linalg.norm(diff[:, k]))
                if val > worst:
                    worst, witness = val, {"basis_vector": k, "matrix_unit": c}
        return worst, witness

    def apply(self, x):
        return self.target.unflatten(self.source.flatten(x) @ self.matrix.T)

    __call__ = apply

    def compressed(self):
        """The complex matrix between orthonormal bases of source and target."""
        return self.target.basis.conj().T @ self.matrix @ self.source.basis

    def entries(self):
        """Matrix over A representing the map on the ambient modules."""
        a = self.source.algebra
        out = np.zeros((self.target.n, self.source.n, a.d, a.d), dtype=complex)
        for j in range(self.source.n):
            e = np.zeros((self.source.n, a.d, a.d), dtype=complex)
            e[j] = a.unit()
            out[:, j] = self.apply(e)
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0

    @property
    def dagger(self) -> "ModuleMap":
        if self._adjoint is None:
            self._adjoint = adjoint(self)
        return self._adjoint

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(other.source, self.target, self.matrix @ other.matrix, check=False)

    def __add__(self, other):
        self._same_shape(other)
        return ModuleMap(self.source, self.target, self.matrix + other.matrix, check=False)

    def __sub__(self, other):
        self._same_shape(other)
        return ModuleMap(self.source, self.target, self.matrix - other.matrix, check=False)

    def __neg__(self):
        return ModuleMap(self.source, self.target, -self.matrix, check=False)

    def __rmul__(self, scalar):
        return ModuleMap(self.source, self.target, scalar * self.matrix, check=False)

    def _same_shape(self, other):
        if self.matrix.shape != other.matrix.shape:
            raise ModuleError("maps between different modules")

    def allclose(self, other, atol=1e-8):
        return self.matrix.shape == other.matrix.shape and np.allclose(self.matrix, other.matrix, atol=atol, rtol=0)

    def is_self_adjoint(self, tol=1e-8):
        c = self.compressed()
        return c.shape[0] == c.shape[1] and np.abs(c - c.conj().T).max(initial=0.0) <= tol * max(1.0, self.norm())

    def is_positive(self, tol=1e-8) -> bool:
        if not self.is_self_adjoint(tol):
            return False
        c = self.compressed()
        return c.size == 0 or np.linalg.eigvalsh((c + c.conj().T) / 2).min() >= -tol * max(1.0, self.norm())

    def is_projection(self, tol=1e-8) -> bool:
        return self.is_self_adjoint(tol) and np.allclose(self.matrix @ self.matrix, self.matrix, atol=tol)

    def is_partial_isometry(self, tol=1e-8) -> bool:
        m = self.matrix
        return np.allclose(m @ m.conj().T @ m, m, atol=tol)

    def image(self) -> HilbertModule:
        return HilbertModule.from_flat(self.target.algebra, self.target.n, _span(self.matrix @ self.source.basis))

    def kernel(self, tol=KERNEL_TOL) -> HilbertModule:
        c = self.matrix @ self.source.basis
        null = _nullspace(c, tol) if c.size else np.eye(self.source.dim, dtype=complex)
        return HilbertModule.from_flat(self.source.algebra, self.source.n, self.source.basis @ null)

    def __repr__(self):
        return f"ModuleMap({self.source!r} -> {self.target!r})"

    def to_dict(self):
        return {"source": self.source.to_dict(), "target": self.target.to_dict(),
                "matrix": _cpairs(self.matrix)}


def left_multiplication(module: HilbertModule, a) -> ModuleMap:
    """``x -> a x`` on a module inside ``A^1`` (A as a module over itself)."""
    return ModuleMap.from_entries(module, module, np.asarray(a)[None, None])


def adjoint(t: ModuleMap) -> ModuleMap:
    """Solve ``(T u, v) = (u, S v)`` for ``S`` over the module bases.

    With ``u`` running over a C-basis of the source and ``S v_j = sum_k S_kj u_k``
    the system reads ``sum_k (u_i, u_k) S_kj = (T u_i, v_j)`` in A; it is solved
    by least squares and the residual is checked.
    """
    e, f = t.source, t.target
    if e.dim == 0 or f.dim == 0:
        s = ModuleMap(f, e, np.zeros((e.ambient_dim, f.ambient_dim)), check=False)
        s._adjoint = t
        return s
    u = e.unflatten(e.basis.T)
    v = f.unflatten(f.basis.T)
    tu = f.unflatten((t.matrix @ e.basis).T)
    a = e.algebra
    g = a.coords(np.einsum("iqba,kqbc->ikac", np.conj(u), u))      # (i, k, dim)
    c = a.coords(np.einsum("iqba,jqbc->ijac", np.conj(tu), v))     # (i, j, dim)
    lhs = np.transpose(g, (0, 2, 1)).reshape(-1, e.dim)
    rhs = np.transpose(c, (0, 2, 1)).reshape(-1, f.dim)
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    resid = float(np.abs(lhs @ sol - rhs).max(initial=0.0))
    if resid > 1e-8 * max(1.0, t.norm()):
        raise AdjointError(f"adjoint system is infeasible (residual {resid:.3g})")
    mat = e.basis @ sol @ f.basis.conj().T
    s = ModuleMap(f, e, mat, check=False)
    s._adjoint = t
    return s


def theta(y, x, source: HilbertModule, target: HilbertModule | None = None) -> ModuleMap:
    """The rank-one map ``z -> y (x, z)`` from ``source`` (containing x) to ``target`` (containing y)."""
    target = source if target is None else target
    if not source.contains(x):
        raise ModuleError("x is not in the source module")
    if not target.contains(y):
        raise ModuleError("y is not in the target module")
    probes = source.unflatten(np.eye(source.ambient_dim))
    ip = np.einsum("iba,pibc->pac", np.conj(x), probes)
    img = np.einsum("jab,pbc->pjac", y, ip)
    return ModuleMap(source, target, target.flatten(img).T, check=False)


def compact_span_rank(module: HilbertModule) -> int:
    """Complex dimension of the span of ``theta(u, v)`` over basis pairs."""
    flats = []
    for i in range(module.dim):
        ui = module.element_of_basis(i)
        for j in range(module.dim):
            flats.append(theta(ui, module.element_of_basis(j), module).matrix.reshape(-1))
    if not flats:
        return 0
    return int(np.linalg.matrix_rank(np.array(flats), tol=1e-8))


def endomorphism_dimension(module: HilbertModule) -> int:
    """``dim Mor(E) = sum_b k_b^2`` with ``k`` the dimension vector."""
    return sum(k * k for k in module.dimension_vector())


# ---------------------------------------------------------------------------
# orthocomplements, polar decomposition, spectra


@dataclass
class Orthocomplement:
    complement: HilbertModule
    orthocomplemented: bool
    defect: float


def orthocomplement(sub: HilbertModule, module: HilbertModule | None = None) -> Orthocomplement:
    """``S^perp = {x in E : (y, x) = 0 for all generators y of S}`` by a null-space solve."""
    e = module or HilbertModule.standard(sub.algebra, sub.n)
    if not e.contains_module(sub):
        raise ModuleError("submodule is not contained in the module")
    a = e.algebra
    u = e.unflatten(e.basis.T)
    if len(sub.generators) and e.dim:
        ip = a.coords(np.einsum("kiba,pibc->kpac", np.conj(sub.generators), u))   # (k, p, dim)
        eqs = np.transpose(ip, (0, 2, 1)).reshape(-1, e.dim)
        null = _nullspace(eqs)
    else:
        null = np.eye(e.dim, dtype=complex)
    comp = HilbertModule.from_flat(a, e.n, e.basis @ null)
    both = _span(np.concatenate([sub.basis, comp.basis], axis=1))
    defect = float(np.linalg.norm(e.projection - both @ both.conj().T, 2)) if e.dim else 0.0
    ok = both.shape[1] == e.dim and defect <= 1e-8
    return Orthocomplement(comp, ok, defect)


@dataclass
class PolarDecomposition:
    u: ModuleMap
    modulus: ModuleMap
    residual: float
    supports_orthocomplemented: bool


def polar_decomposition(t: ModuleMap, tol=KERNEL_TOL) -> PolarDecomposition:
    """``T = u |T|`` with ``u`` a partial isometry vanishing on ``ker T``."""
    e, f = t.source, t.target
    c = t.compressed()
    ok = (orthocomplement(t.image(), f).orthocomplemented
          and orthocomplement(t.dagger.image(), e).orthocomplemented)
    if c.size == 0:
        zero_u = ModuleMap(e, f, np.zeros_like(t.matrix), check=False)
        return PolarDecomposition(zero_u, ModuleMap(e, e, np.zeros((e.ambient_dim,) * 2), check=False), 0.0, ok)
    w, s, vh = np.linalg.svd(c, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    v = vh.conj().T
    mod = v @ np.diag(s) @ vh
    u = w[:, :r] @ vh[:r]
    mod_map = ModuleMap(e, e, e.basis @ mod @ e.basis.conj().T, check=False)
    u_map = ModuleMap(e, f, f.basis @ u @ e.basis.conj().T, check=False)
    residual = float(np.linalg.norm(t.matrix - u_map.matrix @ mod_map.matrix, 2))
    return PolarDecomposition(u_map, mod_map, residual, ok)


@dataclass
class ClosedRangeVerdict:
    closed: bool
    gap: float              # smallest eigenvalue of T^*T above the kernel threshold; inf if none
    kernel_dim: int         # complex dimension
    kernel_dims: list[int]  # dimension vector over A
    eigenvalues: np.ndarray


def closed_range_test(t: ModuleMap, threshold=KERNEL_TOL) -> ClosedRangeVerdict:
    c = t.compressed()
    ev = np.linalg.eigvalsh(c.conj().T @ c) if c.shape[1] else np.zeros(0)
    above = ev[ev > threshold]
    gap = float(above.min()) if len(above) else math.inf
    kern = t.kernel()
    return ClosedRangeVerdict(gap > 0, gap, int(np.sum(ev <= threshold)), kern.dimension_vector(), ev)


class CompactIdeal:
    """``K(E)`` as a predicate.  For finitely generated modules over a unital
    finite-dimensional algebra it is all of ``Mor(E)``."""

    def __init__(self, module: HilbertModule):
        self.module = module

    def __contains__(self, t: ModuleMap) -> bool:
        return t.source.same_as(self.module) and t.target.same_as(self.module)


@dataclass
class FredholmVerdict:
    fredholm: bool
    parametrix: ModuleMap
    kernel: HilbertModule
    cokernel: HilbertModule
    kernel_dims: list[int]
    cokernel_dims: list[int]
    remainders_compact: bool

    @property
    def index(self) -> list[int]:
        return [k - c for k, c in zip(self.kernel_dims, self.cokernel_dims)]


def is_generalized_fredholm(t: ModuleMap, modulo: CompactIdeal | None = None,
                            tol=KERNEL_TOL) -> FredholmVerdict:
    """Parametrix ``G`` (Moore-Penrose) with ``GT - 1`` and ``TG - 1`` in the compacts."""
    e, f = t.source, t.target
    c = t.compressed()
    pinv = np.linalg.pinv(c, rcond=tol) if c.size else np.zeros((e.dim, f.dim))
    g = ModuleMap(f, e, e.basis @ pinv @ f.basis.conj().T, check=False)
    ideal_e = modulo if modulo is not None else CompactIdeal(e)
    ideal_f = CompactIdeal(f)
    rem = ((g @ t) - e.identity()) in ideal_e and ((t @ g) - f.identity()) in ideal_f
    kern = t.kernel(tol)
    coker = t.dagger.kernel(tol)
    return FredholmVerdict(rem, g, kern, coker, kern.dimension_vector(), coker.dimension_vector(), rem)


@dataclass
class StabilizationEmbedding:
    isometry: ModuleMap           # E -> A^n
    projection_entries: np.ndarray  # P in M_n(A)
    defect: float


def stabilization_embedding(module: HilbertModule) -> StabilizationEmbedding:
    """Exhibit ``E`` as the range of a projection ``P`` in ``M_n(A)`` acting on ``A^n``."""
    amb = HilbertModule.standard(module.algebra, module.n)
    v = ModuleMap(module, amb, module.projection)
    p = ModuleMap(amb, amb, module.projection)
    entries = p.entries()
    rebuilt = ModuleMap.from_entries(amb, amb, entries, check=False).matrix
    defect = max(float(np.abs(v.dagger.matrix @ v.matrix - module.projection).max(initial=0.0)),
                 float(np.abs(rebuilt - module.projection).max(initial=0.0)),
                 float(np.abs(entries @ entries - entries).max(initial=0.0)) if module.n == 1 else 0.0)
    return StabilizationEmbedding(v, entries, defect)


# ---------------------------------------------------------------------------
# representations and tensor products


class Representation:
    """A linear map ``A -> Mor(F)`` given by the images of the matrix units of ``A``."""

    def __init__(self, algebra: MatrixAlgebra, module: HilbertModule, images):
        images = np.asarray(images, dtype=complex)
        if images.shape != (algebra.dim, module.ambient_dim, module.ambient_dim):
            raise ModuleError("one flat matrix per matrix unit of the algebra is required")
        p = module.projection
        self.algebra, self.module = algebra, module
        self.images = p @ images @ p

    @classmethod
    def from_function(cls, algebra, module, fn) -> "Representation":
        """``fn(a)`` returns the flat matrix of the image of ``a``."""
        return cls(algebra, module, np.array([fn(b) for b in algebra.basis]))

    @classmethod
    def scalar(cls, module: HilbertModule) -> "Representation":
        """The unital action of ``C`` by scalars."""
        from .matrix_algebra import complex_numbers
        return cls(complex_numbers(), module, module.projection[None])

    @classmethod
    def zero(cls, algebra, module) -> "Representation":
        n = module.ambient_dim
        return cls(algebra, module, np.zeros((algebra.dim, n, n)))

    def __call__(self, a):
        return np.tensordot(self.algebra.coords(a), self.images, axes=1)

    def as_map(self, a) -> ModuleMap:
        return ModuleMap(self.module, self.module, self(a), check=False)

    def homomorphism_defect(self) -> float:
        a, im = self.algebra, self.images
        prod = a.coords(np.einsum("pab,qbc->pqac", a.basis, a.basis))
        lhs = np.einsum("pqc,cxy->pqxy", prod, im)
        rhs = np.einsum("pxz,qzy->pqxy", im, im)
        star = a.coords(np.conj(np.transpose(a.basis, (0, 2, 1))))
        sd = np.tensordot(star, im, axes=1) - np.conj(np.transpose(im, (0, 2, 1)))
        scale = max(1.0, float(np.abs(im).max(initial=0.0)) ** 2)
        return float(max(np.abs(lhs - rhs).max(initial=0.0), np.abs(sd).max(initial=0.0)) / scale)

    def linearity_defect(self) -> float:
        """How far the images are from commuting with the right action."""
        return max((ModuleMap(self.module, self.module, m, check=False).linearity_defect()[0]
                    for m in self.images), default=0.0)

    def check(self, tol=1e-8):
        d = self.homomorphism_defect()
        if d > tol:
            raise NotAHomomorphismError(f"representation is not a *-homomorphism (defect {d:.3g})", d)
        d = self.linearity_defect()
        if d > tol:
            raise NotLinearError(f"representation does not commute with the right action (defect {d:.3g})")
        return self

    def is_unital(self, tol=1e-8) -> bool:
        return np.allclose(self(self.algebra.unit()), self.module.projection, atol=tol)


def matrix_action(algebra: MatrixAlgebra, module: HilbertModule) -> Representation:
    """``M_d`` (or a block algebra inside it) acting on ``C^d`` by matrix multiplication.

    ``module`` must be a module over ``C`` inside ``C^d``.
    """
    if module.algebra.blocks != (1,) or module.n != algebra.d:
        raise ModuleError("matrix action needs a module over C inside C^d")
    return Representation.from_function(algebra, module, lambda a: a)


@dataclass
class InnerTensor:
    """``E (x)_pi F`` realised inside ``B^N`` as the span of ``xi``.

    ``xi[:, k * F.dim + l]`` is the flat image of ``u_k (x) v_l`` for the
    orthonormal bases ``u`` of ``E`` and ``v`` of ``F``.
    """

    left: HilbertModule
    right: HilbertModule
    pi: Representation
    module: HilbertModule
    xi: np.ndarray

    @cached_property
    def _xi_pinv(self):
        return np.linalg.pinv(self.xi, rcond=GRAM_TOL)

    def _realise(self, coeff):
        mat = self.xi @ coeff @ self._xi_pinv
        return ModuleMap(self.module, self.module, mat, check=False)

    def lift_left(self, t: ModuleMap) -> ModuleMap:
        """``T (x) 1`` for an A-linear ``T`` on the left factor."""
        c = t.compressed()
        return self._realise(np.kron(c, np.eye(self.right.dim)))

    def lift_right(self, s: ModuleMap) -> ModuleMap:
        """``1 (x) S``; exact when ``S`` commutes with ``pi``, otherwise its compression."""
        return self._realise(np.kron(np.eye(self.left.dim), s.compressed()))

    def tensor(self, x, y):
        """Element ``x (x) y`` of the tensor module."""
        cu = self.left.basis.conj().T @ self.left.flatten(x)
        cv = self.right.basis.conj().T @ self.right.flatten(y)
        return self.module.unflatten(self.xi @ np.kron(cu, cv))


def inner_tensor(left: HilbertModule, right: HilbertModule, pi: Representation) -> InnerTensor:
    """Interior tensor product over ``A`` with ``pi: A -> Mor(right)``.

    Built as the Hausdorff quotient of the algebraic tensor product: the
    B-valued Gram matrix of elementary tensors is factored as ``G = R^* R``
    with ``R = G^(1/2)``, and the columns of ``R`` realise the tensors.
    """
    if pi.algebra != left.algebra:
        raise ModuleError("representation is defined on a different algebra")
    if not pi.module.same_as(right):
        raise ModuleError("representation acts on a different module")
    pi.check()
    b = right.algebra
    if left.dim == 0 or right.dim == 0:
        zero = HilbertModule.zero(b)
        return InnerTensor(left, right, pi, zero, np.zeros((zero.ambient_dim, 0), dtype=complex))
    u = left.unflatten(left.basis.T)
    v = right.unflatten(right.basis.T)
    ip = np.einsum("kiba,libc->klac", np.conj(u), u)           # (u_k, u_l) in A
    act = np.einsum("klc,cxy->klxy", left.algebra.coords(ip), pi.images)
    pv = np.einsum("klxy,yq->klxq", act, right.basis)           # pi((u_k,u_l)) v_q, flat
    pv_el = right.unflatten(np.moveaxis(pv, 2, 3))              # (k, l, q, m, d, d)
    gram = np.einsum("pmba,klqmbc->kplqac", np.conj(v), pv_el)  # (k, p, l, q, d, d)
    n_el = left.dim * right.dim
    gram = gram.reshape(n_el, n_el, b.d, b.d)
    big = np.transpose(gram, (0, 2, 1, 3)).reshape(n_el * b.d, n_el * b.d)
    big = (big + big.conj().T) / 2
    w, vecs = np.linalg.eigh(big)
    scale = max(1.0, float(w.max(initial=0.0)))
    if w.size and w.min() < -1e-8 * scale:
        raise ModuleError(f"tensor Gram matrix is not positive (eigenvalue {w.min():.3g})")
    w = np.where(w > GRAM_TOL * scale, w, 0.0)
    root = (vecs * np.sqrt(w)) @ vecs.conj().T
    root = np.transpose(root.reshape(n_el, b.d, n_el, b.d), (0, 2, 1, 3))   # entries (p, q) in B
    gens = np.transpose(root, (1, 0, 2, 3))                                 # generator q, slot p
    mask = b.mask
    gens = np.where(mask, gens, 0)
    module = HilbertModule(b, n_el, gens)
    xi = module.flatten(gens).T
    return InnerTensor(left, right, pi, module, xi)


@dataclass
class OuterTensor:
    left: HilbertModule
    right: HilbertModule
    algebra: TensorAlgebra
    module: HilbertModule

    def lift(self, s: ModuleMap, t: ModuleMap) -> ModuleMap:
        """``S (x) T`` acting on the outer tensor product."""
        es, et = s.entries(), t.entries()
        n, m = self.left.n, self.right.n
        ent = np.zeros((n * m, n * m, self.algebra.d, self.algebra.d), dtype=complex)
        for i in range(n):
            for j in range(m):
                for i2 in range(n):
                    for j2 in range(m):
                        ent[i * m + j, i2 * m + j2] = self.algebra.kron(es[i, i2], et[j, j2])
        return ModuleMap.from_entries(self.module, self.module, ent, check=False)

    def tensor(self, x, y):
        n, m = self.left.n, self.right.n
        return np.array([self.algebra.kron(x[i], y[j]) for i in range(n) for j in range(m)])


def outer_tensor(left: HilbertModule, right: HilbertModule) -> OuterTensor:
    """Exterior tensor product, a module over ``A (x) B`` inside ``(A (x) B)^(n m)``."""
    alg = TensorAlgebra(left.algebra, right.algebra)
    n, m = left.n, right.n
    gens = []
    for g in left.generators:
        for h in right.generators:
            gens.append([alg.kron(g[i], h[j]) for i in range(n) for j in range(m)])
    gens = np.array(gens, dtype=complex).reshape(-1, n * m, alg.d, alg.d)
    return OuterTensor(left, right, alg, HilbertModule(alg, n * m, gens))
