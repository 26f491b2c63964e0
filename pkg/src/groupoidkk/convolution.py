"""The convolution *-algebra of a finite groupoid with a Haar system.

A Haar system is a positive weight on each arrow; the measure on the
s-fiber ``G_x`` is the restriction of these weights.  Right invariance asks
``weight(eta) == weight(eta * gamma)`` whenever ``s(eta) == r(gamma)``, which
forces the weight to depend only on the range of the arrow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .groupoid import FiniteGroupoid, GroupoidError, Violation, restrict_to_saturated


class AlgebraMismatchError(GroupoidError):
    """Elements or Haar systems belong to different groupoids."""


class HaarSystem:
    def __init__(self, groupoid: FiniteGroupoid, weight):
        weight = np.asarray(weight, dtype=float).reshape(-1)
        if len(weight) != groupoid.n_arrows:
            raise AlgebraMismatchError("one weight per arrow is required")
        self.groupoid = groupoid
        self.weight = weight
        self.weight.setflags(write=False)

    def check(self) -> list[Violation]:
        g, w = self.groupoid, self.weight
        out = [Violation("haar-positivity", (a,), f"weight {w[a]!r} is not positive")
               for a in np.nonzero(~(w > 0))[0]]
        for gam in range(g.n_arrows):
            for eta in g.source_fiber(g.tgt[gam]):
                prod = g.compose(int(eta), gam)
                if not np.isclose(w[eta], w[prod], rtol=1e-12, atol=0):
                    out.append(Violation("haar-invariance", (int(eta), gam),
                                         "right translation changes the fiber measure"))
        return out

    def fiber(self, x):
        return self.weight[self.groupoid.source_fiber(x)]

    def to_json(self):
        return json.dumps({str(a): float(v) for a, v in enumerate(self.weight)})

    @classmethod
    def from_json(cls, groupoid, text):
        data = json.loads(text)
        w = np.empty(groupoid.n_arrows)
        for k, v in data.items():
            w[int(k)] = float(v)
        if len(data) != groupoid.n_arrows:
            raise AlgebraMismatchError("Haar system must list every arrow")
        return cls(groupoid, w)


def counting_haar(g: FiniteGroupoid) -> HaarSystem:
    return HaarSystem(g, np.ones(g.n_arrows))


def haar_from_unit_weights(g: FiniteGroupoid, unit_weight) -> HaarSystem:
    """The invariant Haar system ``weight(eta) = c(r(eta))`` for positive ``c`` on units."""
    c = np.asarray(unit_weight, dtype=float)
    return HaarSystem(g, c[g.tgt])


class ConvolutionElement:
    """A complex function on the arrows of ``groupoid``."""

    __slots__ = ("groupoid", "coeff")

    def __init__(self, groupoid: FiniteGroupoid, coeff):
        coeff = np.asarray(coeff, dtype=complex).reshape(-1)
        if len(coeff) != groupoid.n_arrows:
            raise AlgebraMismatchError("coefficient vector must have one entry per arrow")
        self.groupoid = groupoid
        self.coeff = coeff

    def __add__(self, other):
        _same(self.groupoid, other.groupoid)
        return ConvolutionElement(self.groupoid, self.coeff + other.coeff)

    def __sub__(self, other):
        _same(self.groupoid, other.groupoid)
        return ConvolutionElement(self.groupoid, self.coeff - other.coeff)

    def __rmul__(self, scalar):
        return ConvolutionElement(self.groupoid, scalar * self.coeff)

    def __repr__(self):
        return f"ConvolutionElement({np.array2string(self.coeff, precision=3)})"

    def allclose(self, other, atol=1e-12):
        return np.allclose(self.coeff, other.coeff, atol=atol, rtol=0)

    def to_json(self):
        return json.dumps({str(a): [float(v.real), float(v.imag)] for a, v in enumerate(self.coeff)})

    @classmethod
    def from_json(cls, groupoid, text):
        data = json.loads(text)
        coeff = np.zeros(groupoid.n_arrows, dtype=complex)
        for k, (re, im) in data.items():
            a = int(k)
            if not 0 <= a < groupoid.n_arrows:
                raise AlgebraMismatchError(f"arrow id {a} out of range")
            coeff[a] = complex(re, im)
        return cls(groupoid, coeff)


def delta(g: FiniteGroupoid, arrow: int) -> ConvolutionElement:
    c = np.zeros(g.n_arrows, dtype=complex)
    c[arrow] = 1
    return ConvolutionElement(g, c)


def random_element(g: FiniteGroupoid, rng) -> ConvolutionElement:
    return ConvolutionElement(g, rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows))


def _same(g1, g2):
    if not g1.same_as(g2):
        raise AlgebraMismatchError("elements live on different groupoids")


def involution(f: ConvolutionElement) -> ConvolutionElement:
    return ConvolutionElement(f.groupoid, np.conj(f.coeff[f.groupoid.inv]))


def convolve(f: ConvolutionElement, g: ConvolutionElement, haar: HaarSystem) -> ConvolutionElement:
    """``(f*g)(gamma) = sum over eta in G_{s(gamma)} of f(gamma eta^-1) g(eta) weight(eta)``."""
    G = f.groupoid
    _same(G, g.groupoid)
    _same(G, haar.groupoid)
    ptr, arrows = G.fiber_index
    out = _kernels.convolve(
        np.ascontiguousarray(f.coeff), np.ascontiguousarray(g.coeff), G.table,
        np.ascontiguousarray(G.inv), np.ascontiguousarray(G.src), ptr, arrows,
        np.ascontiguousarray(haar.weight))
    return ConvolutionElement(G, out)


def one_norm(f: ConvolutionElement, haar: HaarSystem) -> float:
    G = f.groupoid
    _same(G, haar.groupoid)
    a = np.abs(f.coeff) * haar.weight
    b = np.abs(f.coeff[G.inv]) * haar.weight
    sums_a = np.bincount(G.src, weights=a, minlength=G.n_units)
    sums_b = np.bincount(G.src, weights=b, minlength=G.n_units)
    return float(max(sums_a.max(), sums_b.max()))


@dataclass
class RegularRepresentation:
    """Matrix of ``pi_x(f)`` on ``l^2(G_x)`` in the orthonormal basis ``delta_eta / sqrt(weight)``."""

    unit: int
    fiber: np.ndarray
    matrix: np.ndarray


def regular_representation(f: ConvolutionElement, x: int, haar: HaarSystem) -> RegularRepresentation:
    G = f.groupoid
    _same(G, haar.groupoid)
    fiber = np.ascontiguousarray(G.source_fiber(x))
    mat = _kernels.regular_matrix(np.ascontiguousarray(f.coeff), fiber, G.table,
                                  np.ascontiguousarray(G.inv), np.ascontiguousarray(haar.weight))
    return RegularRepresentation(int(x), fiber, np.asarray(mat))


def reduced_norm(f: ConvolutionElement, haar: HaarSystem) -> float:
    """``max_x || pi_x(f) ||``; for finite groupoids this is also the full C*-norm."""
    return max(_opnorm(regular_representation(f, x, haar).matrix) for x in range(f.groupoid.n_units))


full_norm = reduced_norm


def _opnorm(m):
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def regular_image(f: ConvolutionElement, haar: HaarSystem) -> np.ndarray:
    """Block-diagonal matrix of ``(+)_x pi_x(f)``, units in increasing order."""
    mats = [regular_representation(f, x, haar).matrix for x in range(f.groupoid.n_units)]
    d = sum(m.shape[0] for m in mats)
    out = np.zeros((d, d), dtype=complex)
    o = 0
    for m in mats:
        k = m.shape[0]
        out[o:o + k, o:o + k] = m
        o += k
    return out


def algebra_image(g: FiniteGroupoid, haar: HaarSystem | None = None) -> list[np.ndarray]:
    """Images of the point masses ``delta_gamma`` under the sum of regular representations."""
    haar = haar or counting_haar(g)
    return [regular_image(delta(g, a), haar) for a in range(g.n_arrows)]


def regular_intertwiner(g: FiniteGroupoid, haar: HaarSystem, x: int, y: int) -> np.ndarray:
    """Unitary ``W`` with ``pi_y(f) = W pi_x(f) W^*`` for ``x, y`` in one orbit.

    Built from right translation ``eta -> eta * gamma`` by an arrow ``gamma``
    from ``y`` to ``x``.
    """
    hom = g.hom(y, x)
    if len(hom) == 0:
        raise GroupoidError(f"units {x} and {y} lie in different orbits")
    gam = int(hom[0])
    fx, fy = g.source_fiber(x), g.source_fiber(y)
    pos_y = {int(a): i for i, a in enumerate(fy)}
    w = np.zeros((len(fy), len(fx)))
    for j, eta in enumerate(fx):
        w[pos_y[g.compose(int(eta), gam)], j] = 1.0
    return w


def fiber_dimension(g: FiniteGroupoid) -> int:
    """``sum over orbits of |O|^2 |H|``, which must equal the number of arrows."""
    from .groupoid import orbits

    dec = orbits(g)
    return sum(len(o) ** 2 * dec.isotropy[o[0]].order for o in dec.orbits)


@dataclass
class ExactSequence:
    """``0 -> C(G|_U) -> C(G) -> C(G|_F) -> 0`` for a saturated set of units ``U``."""

    groupoid: FiniteGroupoid
    inner: FiniteGroupoid | None
    outer: FiniteGroupoid | None
    inner_arrows: np.ndarray
    outer_arrows: np.ndarray

    def extend_by_zero(self, f: ConvolutionElement) -> ConvolutionElement:
        _same(f.groupoid, self.inner)
        c = np.zeros(self.groupoid.n_arrows, dtype=complex)
        c[self.inner_arrows] = f.coeff
        return ConvolutionElement(self.groupoid, c)

    def restrict(self, f: ConvolutionElement) -> ConvolutionElement:
        _same(f.groupoid, self.groupoid)
        return ConvolutionElement(self.outer, f.coeff[self.outer_arrows])

    def extend_matrix(self):
        m = np.zeros((self.groupoid.n_arrows, len(self.inner_arrows)))
        m[self.inner_arrows, np.arange(len(self.inner_arrows))] = 1
        return m

    def restrict_matrix(self):
        m = np.zeros((len(self.outer_arrows), self.groupoid.n_arrows))
        m[np.arange(len(self.outer_arrows)), self.outer_arrows] = 1
        return m

    def inner_haar(self, haar: HaarSystem) -> HaarSystem:
        return HaarSystem(self.inner, haar.weight[self.inner_arrows])

    def outer_haar(self, haar: HaarSystem) -> HaarSystem:
        return HaarSystem(self.outer, haar.weight[self.outer_arrows])


def exact_sequence_maps(g: FiniteGroupoid, units) -> ExactSequence:
    r = restrict_to_saturated(g, units)
    return ExactSequence(g, r.inner, r.outer, r.inner_arrows, r.outer_arrows)
