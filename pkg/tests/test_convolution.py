import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import constructor_zoo
from groupoidkk.convolution import (AlgebraMismatchError, ConvolutionElement, HaarSystem, algebra_image,
                                    convolve, counting_haar, delta, exact_sequence_maps, fiber_dimension,
                                    haar_from_unit_weights, involution, one_norm, reduced_norm,
                                    regular_intertwiner, regular_representation)
from groupoidkk.groupoid import cyclic_groupoid, disjoint_union, orbits, pair_groupoid

ZOO = constructor_zoo()
NAMES = sorted(ZOO)


def gaussian_integers(g, rng, bound=5):
    """Coefficients with small integer parts, so finite sums are exact in floating point."""
    c = rng.integers(-bound, bound + 1, g.n_arrows) + 1j * rng.integers(-bound, bound + 1, g.n_arrows)
    return ConvolutionElement(g, c)


def lab(g):
    return {l: i for i, l in enumerate(g.arrow_labels)}


def test_counting_haar_examples():
    h = counting_haar(pair_groupoid(2))
    assert np.array_equal(h.weight, np.ones(4))
    for g in ZOO.values():
        hs = counting_haar(g)
        assert hs.check() == []
        assert all(len(hs.fiber(x)) >= 1 for x in range(g.n_units))


def test_non_invariant_haar_is_rejected():
    g = pair_groupoid(2)
    w = np.ones(4)
    w[0] = 2.0
    assert any(v.axiom == "haar-invariance" for v in HaarSystem(g, w).check())
    assert any(v.axiom == "haar-positivity" for v in HaarSystem(g, -np.ones(4)).check())
    assert haar_from_unit_weights(g, [1.0, 3.0]).check() == []


def test_involution_examples():
    g = pair_groupoid(2)
    L = lab(g)
    assert np.array_equal(involution(delta(g, L[(0, 1)])).coeff, delta(g, L[(1, 0)]).coeff)
    z2 = cyclic_groupoid(2)
    f = ConvolutionElement(z2, [2.0, -3.0])
    assert np.array_equal(involution(f).coeff, f.coeff)


def test_convolution_examples():
    g = pair_groupoid(2)
    L = lab(g)
    h = counting_haar(g)
    prod = convolve(delta(g, L[(0, 1)]), delta(g, L[(1, 0)]), h)
    assert np.array_equal(prod.coeff, delta(g, L[(0, 0)]).coeff)
    z2 = cyclic_groupoid(2)
    sq = convolve(delta(z2, 1), delta(z2, 1), counting_haar(z2))
    assert np.array_equal(sq.coeff, delta(z2, 0).coeff)


def test_pair_groupoid_convolution_is_matrix_product(rng):
    g = pair_groupoid(3)
    L = lab(g)
    h = counting_haar(g)
    f, k = gaussian_integers(g, rng), gaussian_integers(g, rng)

    def as_matrix(e):
        m = np.zeros((3, 3), dtype=complex)
        for (x, y), a in L.items():
            m[x, y] = e.coeff[a]
        return m

    assert np.array_equal(as_matrix(convolve(f, k, h)), as_matrix(f) @ as_matrix(k))


def test_mismatched_groupoids_rejected():
    g1, g2 = pair_groupoid(2), pair_groupoid(3)
    with pytest.raises(AlgebraMismatchError):
        convolve(delta(g1, 0), delta(g2, 0), counting_haar(g1))


def test_one_norm_examples(rng):
    g = pair_groupoid(4)
    h = counting_haar(g)
    assert one_norm(delta(g, g.unit(0)), h) == 1
    assert one_norm(ConvolutionElement(g, np.ones(16)), h) == 4


def test_regular_representation_examples():
    g = pair_groupoid(3)
    L = lab(g)
    h = counting_haar(g)
    for x in range(3):
        rep = regular_representation(delta(g, L[(0, 2)]), x, h)
        assert rep.matrix.shape == (3, 3)
        assert np.isclose(np.abs(rep.matrix).sum(), 1) and np.isclose(np.linalg.matrix_rank(rep.matrix), 1)
    z5 = cyclic_groupoid(5)
    shift = regular_representation(delta(z5, 1), 0, counting_haar(z5)).matrix
    assert np.allclose(shift, np.roll(np.eye(5), 1, axis=0))


def test_reduced_norm_examples():
    g = pair_groupoid(3)
    h = counting_haar(g)
    assert np.isclose(reduced_norm(delta(g, g.unit(1)), h), 1)
    z2 = cyclic_groupoid(2)
    assert np.isclose(reduced_norm(ConvolutionElement(z2, [1, 1]), counting_haar(z2)), 2)


def test_exact_sequence_examples(rng):
    g = disjoint_union(pair_groupoid(2), cyclic_groupoid(3))
    es = exact_sequence_maps(g, [0, 1])
    ext, res = es.extend_matrix(), es.restrict_matrix()
    assert np.linalg.matrix_rank(ext) == 4
    assert ext.shape[1] == 4 and ext.shape[0] - np.linalg.matrix_rank(res) == 4
    assert not np.any(res @ ext)
    h = counting_haar(g)
    f, k = gaussian_integers(g, rng), gaussian_integers(g, rng)
    lhs = es.restrict(convolve(f, k, h))
    rhs = convolve(es.restrict(f), es.restrict(k), es.outer_haar(h))
    assert np.array_equal(lhs.coeff, rhs.coeff)
    u = gaussian_integers(es.inner, rng)
    assert np.array_equal(es.extend_by_zero(involution(u)).coeff, involution(es.extend_by_zero(u)).coeff)


def test_serialization_roundtrip(rng):
    g = pair_groupoid(2)
    f = gaussian_integers(g, rng)
    assert np.array_equal(ConvolutionElement.from_json(g, f.to_json()).coeff, f.coeff)
    assert set(json.loads(f.to_json())) == {"0", "1", "2", "3"}
    h = haar_from_unit_weights(g, [1.0, 2.0])
    assert np.array_equal(HaarSystem.from_json(g, h.to_json()).weight, h.weight)


@given(st.sampled_from(NAMES), st.integers(0, 2 ** 32 - 1))
def test_algebra_laws_exact(name, seed):
    g = ZOO[name]
    rng = np.random.default_rng(seed)
    h = counting_haar(g)
    f, k, m = (gaussian_integers(g, rng) for _ in range(3))
    assert np.array_equal(convolve(convolve(f, k, h), m, h).coeff, convolve(f, convolve(k, m, h), h).coeff)
    assert np.array_equal(involution(convolve(f, k, h)).coeff,
                          convolve(involution(k), involution(f), h).coeff)
    assert np.array_equal(involution(involution(f)).coeff, f.coeff)


@given(st.sampled_from(NAMES), st.integers(0, 2 ** 32 - 1))
def test_norm_properties(name, seed):
    g = ZOO[name]
    rng = np.random.default_rng(seed)
    h = haar_from_unit_weights(g, rng.uniform(0.5, 2.0, g.n_units))
    f = ConvolutionElement(g, rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows))
    k = ConvolutionElement(g, rng.standard_normal(g.n_arrows))
    r = reduced_norm(f, h)
    assert r > 0
    assert r <= one_norm(f, h) * (1 + 1e-12)
    assert one_norm(convolve(f, k, h), h) <= one_norm(f, h) * one_norm(k, h) * (1 + 1e-12)
    assert abs(reduced_norm(convolve(involution(f), f, h), h) - r ** 2) <= 1e-8 * r ** 2
    for x in range(g.n_units):
        a = regular_representation(f, x, h).matrix
        b = regular_representation(k, x, h).matrix
        assert np.allclose(regular_representation(convolve(f, k, h), x, h).matrix, a @ b)
        assert np.allclose(regular_representation(involution(f), x, h).matrix, a.conj().T)


@pytest.mark.parametrize("name", NAMES)
def test_fiber_dimension_and_orbit_equivalence(name, rng):
    g = ZOO[name]
    assert fiber_dimension(g) == g.n_arrows
    h = counting_haar(g)
    f = ConvolutionElement(g, rng.standard_normal(g.n_arrows))
    for orbit in orbits(g).orbits:
        x = orbit[0]
        for y in orbit[1:]:
            w = regular_intertwiner(g, h, x, y)
            px = regular_representation(f, x, h).matrix
            py = regular_representation(f, y, h).matrix
            assert np.allclose(w @ px @ w.T, py)


def test_algebra_image_spans_full_algebra():
    g = pair_groupoid(3)
    imgs = algebra_image(g)
    assert np.linalg.matrix_rank(np.array([m.reshape(-1) for m in imgs])) == g.n_arrows
