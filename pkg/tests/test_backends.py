import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import constructor_zoo
from groupoidkk import _kernels
from groupoidkk._kernels import _fallback
from groupoidkk.convolution import haar_from_unit_weights

ckernels = pytest.importorskip("groupoidkk._kernels._ckernels")
ZOO = constructor_zoo()


def conv_args(g, rng):
    haar = haar_from_unit_weights(g, rng.uniform(0.5, 2.0, g.n_units))
    f = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    h = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    ptr, arrows = g.fiber_index
    return (f, h, np.ascontiguousarray(g.table), np.ascontiguousarray(g.inv), np.ascontiguousarray(g.src),
            ptr, arrows, np.ascontiguousarray(haar.weight))


def test_compiled_backend_selected():
    if os.environ.get("GROUPOIDKK_PURE"):
        assert _kernels.BACKEND == "python"
    else:
        assert _kernels.BACKEND == "cython"


@pytest.mark.parametrize("name", sorted(ZOO))
def test_convolution_kernels_agree(name, rng):
    g = ZOO[name]
    args = conv_args(g, rng)
    assert np.allclose(ckernels.convolve(*args), _fallback.convolve(*args), atol=1e-12)
    f, weight = args[0], args[-1]
    for x in range(g.n_units):
        fiber = np.ascontiguousarray(g.source_fiber(x))
        a = np.asarray(ckernels.regular_matrix(f, fiber, args[2], args[3], weight))
        b = _fallback.regular_matrix(f, fiber, args[2], args[3], weight)
        assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("name", sorted(ZOO))
def test_associativity_kernels_agree_on_valid_tables(name):
    t = np.ascontiguousarray(ZOO[name].table)
    assert len(ckernels.associativity_violations(t)) == len(_fallback.associativity_violations(t)) == 0


@given(st.sampled_from(sorted(ZOO)), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60)
def test_associativity_kernels_agree_on_corrupted_tables(name, seed):
    rng = np.random.default_rng(seed)
    t = ZOO[name].table.copy()
    defined = np.argwhere(t >= 0)
    a, b = defined[rng.integers(len(defined))]
    t[a, b] = rng.integers(t.shape[0])
    t = np.ascontiguousarray(t)
    c = np.asarray(ckernels.associativity_violations(t, 64)).reshape(-1, 3)
    p = _fallback.associativity_violations(t, 64)
    assert np.array_equal(c, p)


def test_pure_python_backend_in_subprocess():
    code = ("import json, groupoidkk\n"
            "from groupoidkk.wedderburn import decompose\n"
            "from groupoidkk.convolution import algebra_image\n"
            "d = decompose(algebra_image(groupoidkk.cyclic_groupoid(3)), seed=0)\n"
            "print(json.dumps({'backend': groupoidkk.BACKEND, 'blocks': [list(b) for b in d.blocks], "
            "'valid': groupoidkk.validate(groupoidkk.pair_groupoid(4)) == []}))\n")
    env = dict(os.environ, GROUPOIDKK_PURE="1")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    out = json.loads(proc.stdout)
    assert out == {"backend": "python", "blocks": [[1, 3]], "valid": True}
