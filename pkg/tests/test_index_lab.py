import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from groupoidkk.index_lab import (Grid1D, GridError, NonEllipticSymbolError, PhaseSpaceSymbol,
                                  RefinementNeeded, SymbolOnCircle, UnreliableIndexWarning,
                                  annihilator, bott_dirac, creation, deformation_family, hamiltonian,
                                  ladder_product, numerical_index, random_elliptic_symbol,
                                  rotated_bott_dirac, run_experiment, spinor_rotation, toeplitz,
                                  topological_index, verify_index_theorem, winding_number)
from groupoidkk.index_lab.discretize import difference
from groupoidkk.index_lab.experiments import ExperimentConfigError, build_symbol, parse_symbol_shorthand

# -- grids ------------------------------------------------------------------------


def test_grid_invariants():
    g = Grid1D(8, 512)
    assert g.h == pytest.approx(16 / 511)
    assert np.allclose(g.nodes, -g.nodes[::-1])
    assert g.refined() == Grid1D(16, 1024)
    with pytest.raises(GridError):
        Grid1D(8, 15)
    with pytest.raises(GridError):
        Grid1D(0, 64)


def test_ladder_resolution_guard():
    with pytest.raises(GridError):
        annihilator(Grid1D(8, 64))
    annihilator(Grid1D(6, 64))


# -- the harmonic oscillator -------------------------------------------------------


@pytest.fixture(scope="module")
def ann512():
    return annihilator(Grid1D(8, 512))


def test_annihilator_near_kernel(ann512):
    s = np.linalg.svd(ann512.matrix, compute_uv=False)[::-1]
    assert s[0] <= 1e-6 and s[1] >= 1e-1
    rep = numerical_index(ann512, keep_vectors=True)
    assert rep.index == 1 and rep.gap_ratio >= 1e3
    g = Grid1D(8, 512)
    gauss = np.exp(-g.nodes ** 2 / 2)
    v = rep.kernel_vectors[:, 0]
    assert abs(np.vdot(gauss, v)) / np.linalg.norm(gauss) >= 0.999


def test_adjoint_is_creation_on_smooth_functions(ann512):
    g = Grid1D(8, 512)
    x = g.nodes
    f = np.exp(-x ** 2 / 2) * np.cos(x)
    exact = (-np.gradient(f, x, edge_order=2) + x * f)
    approx = creation(g).matrix @ f
    interior = np.abs(x) < 6
    assert np.abs(approx - exact)[interior].max() < 10 * g.h
    assert np.allclose(creation(g).matrix, ann512.matrix.conj().T)


def test_central_difference_has_a_doubler():
    g = Grid1D(6, 64)
    rep = numerical_index(annihilator(g, scheme="central"))
    assert rep.index == 0
    assert np.allclose(difference(g, "central"), -difference(g, "central").T)


def test_creation_and_diagonal():
    rep = numerical_index(creation(Grid1D(8, 512)))
    assert rep.index == -1 and rep.gap_ratio >= 1e3
    d = numerical_index(np.diag(np.linspace(1, 2, 20)))
    assert d.index == 0 and d.kernel_dim == 0


def test_hamiltonian_ground_state():
    g = Grid1D(6, 256)
    ev = np.linalg.eigvalsh(hamiltonian(g).matrix)
    assert ev[0] == pytest.approx(1, abs=1e-2) and ev[1] == pytest.approx(3, abs=5e-2)


def test_refinement_stability():
    base = Grid1D(4, 64)
    for g in (base, Grid1D(4, 128), base.refined()):
        rep = numerical_index(annihilator(g))
        assert rep.index == 1 and rep.gap_ratio >= 1e2


def test_unreliable_verdict_returns_both_counts():
    s = np.geomspace(1e-7, 1, 30)
    with pytest.warns(UnreliableIndexWarning):
        rep = numerical_index(np.diag(s))
    assert not rep.reliable
    assert rep.kernel_dim == rep.cokernel_dim


def test_rectangular_and_empty_matrices():
    rep = numerical_index(np.eye(3, 5))
    assert rep.index == 2 and rep.kernel_dim == 2 and rep.cokernel_dim == 0
    assert numerical_index(np.zeros((0, 4))).index == 4


@given(st.integers(1, 6), st.integers(0, 3), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_index_matches_rank_oracle(rank, extra, seed):
    rng = np.random.default_rng(seed)
    m, n = rank + extra, rank + 2
    a = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))
    rep = numerical_index(a)
    assert rep.kernel_dim == n - rank and rep.cokernel_dim == m - rank
    assert rep.index == n - m


# -- Bott-Dirac ------------------------------------------------------------------


SMALL_BOTT = Grid1D(4, 20)


def test_bott_dirac_small_grid():
    rep = numerical_index(bott_dirac(SMALL_BOTT))
    assert rep.index == 1 and rep.gap_ratio >= 1e2


def test_bott_dirac_refinement():
    rep = numerical_index(bott_dirac(Grid1D(4, 24)))
    assert rep.index == 1 and rep.gap_ratio >= 1e2


def test_bott_constant_multipliers_index_zero():
    rep = numerical_index(bott_dirac(SMALL_BOTT, constant_multipliers=True))
    assert rep.index == 0


def test_bott_rotation_is_similarity():
    a = bott_dirac(SMALL_BOTT).matrix
    b = rotated_bott_dirac(SMALL_BOTT).matrix
    r = spinor_rotation(SMALL_BOTT.N ** 2)
    assert np.allclose(r @ r.T, np.eye(len(r)))
    sa = np.linalg.svd(a, compute_uv=False)
    sb = np.linalg.svd(b, compute_uv=False)
    assert np.allclose(sa, sb)
    assert numerical_index(rotated_bott_dirac(SMALL_BOTT)).index == 1


def test_bott_matches_ladder_product():
    g = Grid1D(3, 16)
    assert np.allclose(rotated_bott_dirac(g).matrix, ladder_product(g).matrix)


def test_bott_memory_guard():
    with pytest.raises(GridError):
        bott_dirac(Grid1D(6, 129))


# -- circle symbols --------------------------------------------------------------


@pytest.mark.parametrize("k", range(-5, 6))
def test_winding_of_monomials(k):
    assert winding_number(SymbolOnCircle.monomial(k)) == k


def test_winding_examples():
    assert winding_number(SymbolOnCircle.from_function(lambda t: 2 + np.exp(1j * t))) == 0
    f = SymbolOnCircle.from_function(lambda t: np.exp(1j * t) * (2 + np.cos(t)))
    assert winding_number(f) == 1
    phases = np.angle(f.values)
    assert round(np.sum(np.angle(np.exp(1j * np.diff(np.append(phases, phases[0]))))) / (2 * np.pi)) == 1


def test_coarse_grid_requests_refinement():
    with pytest.raises(RefinementNeeded):
        winding_number(SymbolOnCircle.monomial(5, K=16))


def test_non_elliptic_symbols_refused():
    f = SymbolOnCircle.from_function(lambda t: 1 + np.exp(1j * t), K=64)
    with pytest.raises(NonEllipticSymbolError):
        winding_number(f)
    with pytest.raises(NonEllipticSymbolError):
        toeplitz(f, 16)


@pytest.mark.parametrize("k,expected", [(1, -1), (0, 0), (-3, 3)])
def test_toeplitz_examples(k, expected):
    rep = numerical_index(toeplitz(SymbolOnCircle.monomial(k), 128))
    assert rep.index == expected and rep.gap_ratio >= 1e2


def test_toeplitz_of_shift_is_brute_force_shift():
    t = toeplitz(SymbolOnCircle.monomial(1), 16).matrix
    assert np.allclose(t, np.eye(17, k=-1))


@given(st.integers(-3, 3), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10)
def test_toeplitz_index_is_minus_winding(k, seed):
    f = random_elliptic_symbol(np.random.default_rng(seed), k)
    assert numerical_index(toeplitz(f, 96)).index == -winding_number(f)


# -- deformation to the symbol -----------------------------------------------------


def test_x_independent_symbol_is_a_multiplier():
    ps = PhaseSpaceSymbol.from_function(lambda th, xi: 2 + np.tanh(xi) + 0 * th)
    fam = deformation_family(ps, 32)
    for t in (1.0, 0.5, 0.1):
        m = fam.operator(t).matrix
        assert np.allclose(m, np.diag(np.diag(m)))
        assert fam.index(t).index == 0


def test_deformation_matches_toeplitz():
    f = SymbolOnCircle.monomial(1)
    fam = deformation_family(f, 128)
    assert fam.index(1.0).index == numerical_index(toeplitz(f, 128)).index == -1


def test_deformation_constant_in_t_for_random_symbols():
    rng = np.random.default_rng(7)
    for k in (-2, -1, 0, 1, 2):
        f = random_elliptic_symbol(rng, k)
        reps = deformation_family(f, 96).scan((1.0, 0.5, 0.1))
        assert [r.index for r in reps] == [-k] * 3
        assert all(r.gap_ratio >= 1e2 for r in reps)


def test_deformation_rejects_bad_input():
    bad = PhaseSpaceSymbol.from_function(lambda th, xi: np.exp(1j * th) * np.tanh(xi) ** 0 * (xi > 0))
    with pytest.raises(NonEllipticSymbolError):
        deformation_family(bad, 16)
    fam = deformation_family(SymbolOnCircle.monomial(1), 16)
    with pytest.raises(ValueError):
        fam.operator(0.0)
    assert fam.endpoint().shape[0] == 1024


# -- index theorem -------------------------------------------------------------


@pytest.mark.parametrize("k,expected", [(1, -1), (0, 0), (-2, 2)])
def test_verify_index_theorem_examples(k, expected):
    rep = verify_index_theorem(SymbolOnCircle.monomial(k))
    assert (rep.analytical, rep.topological, rep.equal) == (expected, expected, True)
    assert topological_index(SymbolOnCircle.monomial(k)) == expected


# -- experiments ---------------------------------------------------------------


def test_run_experiment_annihilator_is_deterministic():
    cfg = {"experiment": "annihilator", "grid": {"L": 6, "N": 128}}
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.rows == b.rows and a.rows[0]["index"] == 1
    assert a.rows[0]["runtime_ms"] is None
    assert run_experiment(cfg, timing=True).rows[0]["runtime_ms"] >= 0


def test_run_experiment_deformation_and_theorem():
    res = run_experiment({"experiment": "deformation", "grid": {"N": 64},
                          "symbol": {"kind": "random", "params": {"winding": 2}}, "seed": 3})
    assert res.summary["indices"] == [-2, -2, -2] and res.summary["constant"]
    res = run_experiment({"experiment": "index_theorem", "grid": {"N": 64},
                          "symbol": parse_symbol_shorthand("winding:-1")})
    assert res.summary["equal"] and res.summary["analytical"] == 1


def test_experiment_config_errors():
    with pytest.raises(ExperimentConfigError):
        run_experiment({"experiment": "nope"})
    with pytest.raises(ExperimentConfigError):
        build_symbol({"kind": "nope"})
    with pytest.raises(ExperimentConfigError):
        parse_symbol_shorthand("bogus")


def test_no_warnings_on_standard_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        numerical_index(toeplitz(SymbolOnCircle.monomial(2), 64))
