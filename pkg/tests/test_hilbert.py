import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ALGEBRAS, random_entries, random_map, random_module
from groupoidkk.hilbert import (CompactIdeal, HilbertModule, ModuleError, ModuleMap, NotLinearError,
                                Representation, closed_range_test, compact_span_rank, endomorphism_dimension,
                                inner_tensor, is_generalized_fredholm, left_multiplication, matrix_action,
                                orthocomplement, outer_tensor, polar_decomposition, stabilization_embedding,
                                theta)
from groupoidkk.matrix_algebra import MatrixAlgebra, complex_numbers

ALG_NAMES = sorted(ALGEBRAS)
seeds = st.integers(0, 2 ** 32 - 1)


def unit(a, i, j):
    e = np.zeros((a.d, a.d), dtype=complex)
    e[i, j] = 1
    return e


# -- module structure ----------------------------------------------------------


@given(st.sampled_from(ALG_NAMES), seeds)
def test_inner_product_positivity_and_cauchy_schwarz(name, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS[name]
    e = random_module(rng, a, 2)
    x, y = e.random_element(rng), e.random_element(rng)
    assert a.is_positive(e.inner(x, x), tol=1e-10)
    assert e.cauchy_schwarz_margin(x, y) >= -1e-8 * max(1.0, e.norm(x) ** 2 * e.norm(y) ** 2)
    assert e.norm(np.zeros_like(x)) == 0
    if np.abs(x).max() > 0:
        assert e.norm(x) > 0


def test_generators_must_lie_in_algebra():
    a = MatrixAlgebra([1, 1])
    bad = np.zeros((1, 1, 2, 2))
    bad[0, 0, 0, 1] = 1
    with pytest.raises(ModuleError):
        HilbertModule(a, 1, bad)


def test_serialization_roundtrip(rng):
    a = ALGEBRAS["M2+C"]
    e = random_module(rng, a, 2, full=False)
    back = HilbertModule.from_json(e.to_json())
    assert back.same_as(e)
    assert json.loads(e.to_json())["blocks"] == [2, 1]


# -- adjoints and norms -------------------------------------------------------------


def test_adjoint_examples(rng):
    a = ALGEBRAS["M2"]
    e = HilbertModule.standard(a, 1)
    assert e.identity().dagger.allclose(e.identity())
    m = a.random(rng)
    assert left_multiplication(e, m.conj().T).dagger.allclose(left_multiplication(e, m))
    x, y = e.random_element(rng), e.random_element(rng)
    assert theta(y, x, e).dagger.allclose(theta(x, y, e))


def test_non_linear_map_rejected():
    a = ALGEBRAS["M2"]
    e = HilbertModule.standard(a, 1)
    # transpose of the coordinates is C-linear but not A-linear
    m = np.zeros((4, 4))
    for p in range(4):
        i, j = divmod(p, 2)
        m[j * 2 + i, p] = 1
    with pytest.raises(NotLinearError) as exc:
        ModuleMap(e, e, m)
    assert exc.value.witness is not None


@given(st.sampled_from(ALG_NAMES), seeds)
def test_adjoint_identity_and_norms(name, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS[name]
    e, f = random_module(rng, a, 2), random_module(rng, a, 3)
    t = random_map(rng, e, f)
    s = t.dagger
    for _ in range(3):
        x, y = e.random_element(rng), f.random_element(rng)
        assert np.allclose(f.inner(t(x), y), e.inner(x, s(y)), atol=1e-9)
    nt = t.norm()
    assert abs(s.norm() - nt) <= 1e-8 * max(1.0, nt)
    assert abs((s @ t).norm() - nt ** 2) <= 1e-8 * max(1.0, nt ** 2)


@given(st.sampled_from(ALG_NAMES), seeds)
def test_positivity_criterion(name, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS[name]
    e = random_module(rng, a, 2)
    r = random_map(rng, e, e)
    pos = r.dagger @ r
    assert pos.is_positive()
    for g in e.generators:
        assert a.is_positive(e.inner(g, pos(g)), tol=1e-8)
    shift = 0.5 * pos.norm()
    indefinite = pos - shift * e.identity()
    c = indefinite.compressed()
    if np.linalg.eigvalsh((c + c.conj().T) / 2).min() < -1e-6:
        assert not indefinite.is_positive()
        witnesses = [a.is_positive(e.inner(x, indefinite(x)), tol=1e-10)
                     for x in [e.element_of_basis(k) for k in range(e.dim)]]
        w = np.linalg.eigh((c + c.conj().T) / 2)[1][:, 0]
        neg = e.unflatten(e.basis @ w)
        assert not all(witnesses) or not a.is_positive(e.inner(neg, indefinite(neg)), tol=1e-10)


# -- rank-one maps ------------------------------------------------------------------


def test_theta_unit_is_identity():
    for a in ALGEBRAS.values():
        e = HilbertModule.standard(a, 1)
        one = a.unit()[None]
        assert theta(one, one, e).allclose(e.identity())


@given(st.sampled_from(ALG_NAMES), seeds)
def test_theta_identities(name, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS[name]
    e, f = random_module(rng, a, 2), random_module(rng, a, 2)
    x, z = e.random_element(rng), e.random_element(rng)
    y, w = f.random_element(rng), f.random_element(rng)
    t = random_map(rng, f, f)
    th = theta(y, x, e, f)
    assert th.norm() <= e.norm(x) * f.norm(y) * (1 + 1e-9) + 1e-12
    assert abs(theta(x, x, e).norm() - e.norm(x) ** 2) <= 1e-8 * max(1.0, e.norm(x) ** 2)
    assert (t @ th).allclose(theta(t(y), x, e, f), atol=1e-8)
    assert th.dagger.allclose(theta(x, y, f, e), atol=1e-8)
    s = random_map(rng, e, e)
    assert (th @ s).allclose(theta(y, s.dagger(x), e, f), atol=1e-8)
    lhs = theta(y, x, e, f) @ theta(z, w, f, e)
    assert lhs.allclose(theta(np.einsum("iab,bc->iac", y, e.inner(x, z)), w, f, f), atol=1e-8)


@pytest.mark.parametrize("name", ALG_NAMES)
def test_compacts_are_everything(name, rng):
    a = ALGEBRAS[name]
    e = random_module(rng, a, 2, full=False)
    assert compact_span_rank(e) == endomorphism_dimension(e)
    assert e.identity() in CompactIdeal(e)


# -- orthocomplements, polar decomposition, spectra ----------------------------------


def test_orthocomplement_examples():
    a = ALGEBRAS["M2"]
    a2 = HilbertModule.standard(a, 2)
    first = HilbertModule(a, 2, np.array([[a.unit(), np.zeros((2, 2))]]))
    oc = orthocomplement(first, a2)
    second = HilbertModule(a, 2, np.array([[np.zeros((2, 2)), a.unit()]]))
    assert oc.orthocomplemented and oc.complement.same_as(second)
    p = unit(a, 0, 0)
    col = HilbertModule(a, 1, p[None, None])
    comp = orthocomplement(col).complement
    assert comp.same_as(HilbertModule(a, 1, (np.eye(2) - p)[None, None]))
    assert orthocomplement(a2, a2).complement.dim == 0
    assert orthocomplement(HilbertModule.zero(a, 2), a2).complement.same_as(a2)


@given(st.sampled_from(ALG_NAMES), seeds)
def test_kernel_of_adjoint_is_image_complement(name, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS[name]
    e, f = HilbertModule.standard(a, 1), HilbertModule.standard(a, 2)
    t = random_map(rng, e, f)
    assert t.dagger.kernel().same_as(orthocomplement(t.image(), f).complement)


def test_polar_examples(rng):
    a = ALGEBRAS["M2"]
    e = HilbertModule.standard(a, 1)
    q, _ = np.linalg.qr(a.random(rng))
    u = left_multiplication(e, q)
    pd = polar_decomposition(u)
    assert pd.u.allclose(u) and pd.modulus.allclose(e.identity())
    zero = 0 * e.identity()
    assert np.abs(polar_decomposition(zero).u.matrix).max() == 0


@given(st.sampled_from(ALG_NAMES), seeds)
def test_polar_recomposes(name, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS[name]
    e, f = random_module(rng, a, 2), random_module(rng, a, 2)
    t = random_map(rng, e, f)
    pd = polar_decomposition(t)
    assert pd.residual <= 1e-8 * max(1.0, t.norm())
    assert pd.u.is_partial_isometry() and pd.supports_orthocomplemented
    assert (pd.u.dagger @ pd.u).is_projection() and (pd.u @ pd.u.dagger).is_projection()


def test_closed_range_examples():
    c = complex_numbers()
    e2 = HilbertModule.standard(c, 2)
    proj = ModuleMap(e2, e2, np.diag([1.0, 0.0]))
    assert closed_range_test(proj).gap == pytest.approx(1)
    assert closed_range_test(ModuleMap(e2, e2, np.diag([1.0, 1e-3]))).gap == pytest.approx(1e-6)
    m2 = HilbertModule.standard(ALGEBRAS["M2"], 1)
    v = closed_range_test(left_multiplication(m2, unit(ALGEBRAS["M2"], 0, 1)))
    assert v.gap == pytest.approx(1) and v.kernel_dims == [1]


def test_fredholm_examples(rng):
    a = ALGEBRAS["M2+C"]
    e = HilbertModule.standard(a, 2)
    t = random_map(rng, e, e)
    v = is_generalized_fredholm(t)
    assert v.fredholm and v.kernel.dim == 0
    assert (v.parametrix @ t).allclose(e.identity(), atol=1e-8)
    f = HilbertModule.standard(a, 1)
    z = ModuleMap(e, f, np.zeros((f.ambient_dim, e.ambient_dim)))
    vz = is_generalized_fredholm(z)
    assert vz.kernel.same_as(e) and vz.cokernel.same_as(f)


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_fredholm_corner_maps_match_rank_oracle(p, q, seed):
    rng = np.random.default_rng(seed)
    a = ALGEBRAS["C2"]
    e, f = HilbertModule.standard(a, p), HilbertModule.standard(a, q)
    ent = random_entries(rng, a, q, p)
    drop = rng.integers(0, 2, size=(q, p))
    ent[:, :, 1, 1] *= drop                      # sparsify the second block
    t = ModuleMap.from_entries(e, f, ent)
    v = is_generalized_fredholm(t)
    for b in range(2):
        block = ent[:, :, b, b]
        r = np.linalg.matrix_rank(block)
        assert v.kernel_dims[b] == p - r and v.cokernel_dims[b] == q - r


def test_stabilization_embedding(rng):
    a = ALGEBRAS["M2"]
    e = random_module(rng, a, 2, full=False)
    emb = stabilization_embedding(e)
    assert emb.defect <= 1e-10
    assert orthocomplement(e).orthocomplemented


# -- tensor products -----------------------------------------------------------------


def test_inner_tensor_examples(rng):
    c = complex_numbers()
    ep, fq = HilbertModule.standard(c, 3), HilbertModule.standard(c, 2)
    assert inner_tensor(ep, fq, Representation.scalar(fq)).module.dim == 6
    m2 = ALGEBRAS["M2"]
    c2 = HilbertModule.standard(c, 2)
    pi = matrix_action(m2, c2)
    row = HilbertModule(m2, 1, unit(m2, 0, 0)[None, None])
    assert inner_tensor(row, c2, pi).module.dim == 1
    unit_module = HilbertModule.standard(m2, 1)
    assert inner_tensor(unit_module, c2, pi).module.dim == c2.dim


def test_inner_tensor_unit_module_identifies_with_factor(rng):
    m2 = ALGEBRAS["M2"]
    c = complex_numbers()
    c2 = HilbertModule.standard(c, 2)
    t = inner_tensor(HilbertModule.standard(m2, 1), c2, matrix_action(m2, c2))
    one = m2.unit()[None]
    for _ in range(3):
        y, y2 = c2.random_element(rng), c2.random_element(rng)
        lhs = t.module.inner(t.tensor(one, y), t.tensor(one, y2))
        assert np.allclose(lhs, c2.inner(y, y2))


def test_inner_tensor_rejects_bad_representation():
    c = complex_numbers()
    c2 = HilbertModule.standard(c, 2)
    m2 = ALGEBRAS["M2"]
    bad = Representation(m2, c2, 2 * np.array([unit(m2, i, j) for i in range(2) for j in range(2)]))
    with pytest.raises(Exception):
        inner_tensor(HilbertModule.standard(m2, 1), c2, bad)


@given(st.sampled_from(ALG_NAMES), st.sampled_from(ALG_NAMES), seeds)
def test_outer_tensor_dimension_is_multiplicative(n1, n2, seed):
    rng = np.random.default_rng(seed)
    e = random_module(rng, ALGEBRAS[n1], 2)
    f = random_module(rng, ALGEBRAS[n2], 1)
    o = outer_tensor(e, f)
    assert o.module.dim == e.dim * f.dim


def test_outer_tensor_of_algebras():
    a, b = ALGEBRAS["M2"], ALGEBRAS["C2"]
    o = outer_tensor(HilbertModule.standard(a, 1), HilbertModule.standard(b, 1))
    assert o.module.same_as(HilbertModule.standard(a.tensor(b), 1))
