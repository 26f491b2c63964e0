"""Config-driven index experiments producing CSV-ready rows and a JSON summary.

Config: ``{"experiment": ..., "grid": {"L": .., "N": ..}, "symbol": {"kind": .., "params": {..}},
"t_samples": [...], "seed": 0}``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .circle import (SymbolOnCircle, deformation_family, random_elliptic_symbol, toeplitz,
                     verify_index_theorem, winding_number)
from .discretize import Grid1D, annihilator, bott_dirac, creation
from .spectral import numerical_index

EXPERIMENTS = ("annihilator", "creation", "bott_dirac", "bott_constant",
               "toeplitz", "deformation", "index_theorem")
CSV_COLUMNS = ("experiment", "N", "L", "t", "index", "gap", "runtime_ms")


class ExperimentConfigError(ValueError):
    pass


def build_symbol(source: dict, seed: int = 0, K: int = 1024) -> SymbolOnCircle:
    kind = source.get("kind", "monomial")
    p = source.get("params", {})
    if kind == "monomial":
        return SymbolOnCircle.monomial(int(p.get("k", 1)), K)
    if kind == "affine":
        c, k = complex(p.get("c", 2.0)), int(p.get("k", 1))
        return SymbolOnCircle.from_function(lambda th: c + np.exp(1j * k * th), K)
    if kind == "modulated":
        a, k = float(p.get("a", 2.0)), int(p.get("k", 1))
        return SymbolOnCircle.from_function(lambda th: np.exp(1j * k * th) * (a + np.cos(th)), K)
    if kind == "random":
        rng = np.random.default_rng(seed)
        return random_elliptic_symbol(rng, int(p.get("winding", 1)), K)
    raise ExperimentConfigError(f"unknown symbol kind {kind!r}")


def parse_symbol_shorthand(text: str) -> dict:
    """``winding:-2`` -> monomial of degree -2; ``random:3`` -> random symbol of winding 3."""
    kind, _, arg = text.partition(":")
    if kind == "winding":
        return {"kind": "monomial", "params": {"k": int(arg)}}
    if kind == "random":
        return {"kind": "random", "params": {"winding": int(arg)}}
    if kind == "affine":
        return {"kind": "affine", "params": {"c": float(arg), "k": 1}}
    raise ExperimentConfigError(f"cannot parse symbol {text!r}")


@dataclass
class ExperimentResult:
    rows: list[dict]
    summary: dict


def _row(name, N, L, t, rep, elapsed, timing):
    return {"experiment": name, "N": N, "L": L, "t": t, "index": rep.index,
            "gap": rep.gap_ratio, "runtime_ms": round(elapsed * 1e3, 3) if timing else None}


def run_experiment(config: dict, timing: bool = False) -> ExperimentResult:
    """Run one experiment.  Wall-clock time is recorded only with ``timing``,
    so that reports are reproducible byte for byte by default."""
    name = config.get("experiment")
    if name not in EXPERIMENTS:
        raise ExperimentConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    seed = int(config.get("seed", 0))
    grid_cfg = config.get("grid", {})
    rows = []
    summary = {"experiment": name, "seed": seed}
    if name in ("annihilator", "creation", "bott_dirac", "bott_constant"):
        grid = Grid1D(float(grid_cfg.get("L", 8)), int(grid_cfg.get("N", 512)))
        build = {"annihilator": annihilator, "creation": creation, "bott_dirac": bott_dirac,
                 "bott_constant": lambda g: bott_dirac(g, constant_multipliers=True)}[name]
        t0 = time.perf_counter()
        rep = numerical_index(build(grid))
        rows.append(_row(name, grid.N, grid.L, None, rep, time.perf_counter() - t0, timing))
        summary.update(rep.as_dict())
        return ExperimentResult(rows, summary)
    M = int(grid_cfg.get("N", 128))
    symbol = build_symbol(config.get("symbol", {}), seed)
    summary["winding"] = winding_number(symbol)
    if name == "toeplitz":
        t0 = time.perf_counter()
        rep = numerical_index(toeplitz(symbol, M))
        rows.append(_row(name, M, None, None, rep, time.perf_counter() - t0, timing))
        summary.update(rep.as_dict())
    elif name == "deformation":
        fam = deformation_family(symbol, M)
        indices = []
        for t in config.get("t_samples", [1.0, 0.5, 0.1]):
            t0 = time.perf_counter()
            rep = fam.index(float(t))
            rows.append(_row(name, M, None, float(t), rep, time.perf_counter() - t0, timing))
            indices.append(rep.index)
        summary["indices"] = indices
        summary["constant"] = len(set(indices)) == 1
    else:
        t0 = time.perf_counter()
        rep = verify_index_theorem(symbol, M)
        rows.append({"experiment": name, "N": M, "L": None, "t": 1.0, "index": rep.analytical,
                     "gap": rep.gap_ratio,
                     "runtime_ms": round((time.perf_counter() - t0) * 1e3, 3) if timing else None})
        summary.update(rep.as_dict())
    return ExperimentResult(rows, summary)
