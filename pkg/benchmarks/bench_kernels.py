"""Compare the compiled table kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are timed on
the same inputs and their outputs are checked for agreement.
"""

import argparse
import timeit

import numpy as np

from groupoidkk import _kernels, pair_groupoid
from groupoidkk._kernels import _fallback
from groupoidkk.convolution import counting_haar

try:
    from groupoidkk._kernels import _ckernels
except ImportError:
    _ckernels = None


def _inputs(n):
    g = pair_groupoid(n)
    haar = counting_haar(g)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    h = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    ptr, arrows = g.fiber_index
    table = np.ascontiguousarray(g.table)
    inv, src = np.ascontiguousarray(g.inv), np.ascontiguousarray(g.src)
    weight = np.ascontiguousarray(haar.weight)
    conv_args = (f, h, table, inv, src, ptr, arrows, weight)
    fiber = np.ascontiguousarray(g.source_fiber(0))
    reg_args = (f, fiber, table, inv, weight)
    return table, conv_args, reg_args


def bench(n, repeat):
    table, conv_args, reg_args = _inputs(n)
    rows = []
    for name, mod in (("python", _fallback), ("cython", _ckernels)):
        if mod is None:
            continue
        t_assoc = min(timeit.repeat(lambda: mod.associativity_violations(table, 64), number=1, repeat=repeat))
        t_conv = min(timeit.repeat(lambda: mod.convolve(*conv_args), number=1, repeat=repeat))
        t_reg = min(timeit.repeat(lambda: mod.regular_matrix(*reg_args), number=1, repeat=repeat))
        rows.append((name, t_assoc, t_conv, t_reg))
    if _ckernels is not None:
        assert np.allclose(_fallback.convolve(*conv_args), _ckernels.convolve(*conv_args))
        assert np.allclose(_fallback.regular_matrix(*reg_args), _ckernels.regular_matrix(*reg_args))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 24])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'n':>4} {'backend':>8} {'assoc (s)':>12} {'convolve (s)':>13} {'regular (s)':>12}")
    for n in args.sizes:
        for name, ta, tc, tr in bench(n, args.repeat):
            print(f"{n:>4} {name:>8} {ta:>12.5f} {tc:>13.5f} {tr:>12.5f}")


if __name__ == "__main__":
    main()
