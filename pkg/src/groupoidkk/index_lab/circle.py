"""Zero-order symbols on the circle, Toeplitz operators and the deformation ``P(x, tD)``.

Conventions: the circle is oriented by increasing ``theta``, Fourier modes
are ``e^{ik theta}``, and the Hardy projection keeps ``k >= 0``.  With these
choices the analytical index of the quantization of ``f`` equals
``-winding(f)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discretize import DiscretizedOperator
from .spectral import IndexReport, numerical_index

WINDING_INTEGER_TOL = 1e-6
MAX_PHASE_STEP = np.pi / 2
ELLIPTIC_REL_TOL = 1e-12   # |f| below this fraction of max |f| counts as a zero


class NonEllipticSymbolError(ValueError):
    pass


class RefinementNeeded(ValueError):
    """The sampling grid is too coarse to follow the phase of the symbol."""


@dataclass
class SymbolOnCircle:
    values: np.ndarray   # f(theta_k) at theta_k = 2 pi k / K

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)

    @classmethod
    def from_function(cls, fn: Callable, K: int = 1024) -> "SymbolOnCircle":
        return cls(fn(2 * np.pi * np.arange(K) / K))

    @classmethod
    def monomial(cls, k: int, K: int = 1024) -> "SymbolOnCircle":
        return cls.from_function(lambda th: np.exp(1j * k * th), K)

    @property
    def K(self) -> int:
        return len(self.values)

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.K) / self.K

    @property
    def min_modulus(self) -> float:
        return float(np.abs(self.values).min())

    @property
    def elliptic(self) -> bool:
        return self.min_modulus > ELLIPTIC_REL_TOL * float(np.abs(self.values).max(initial=0.0))

    def fourier(self) -> Callable[[np.ndarray], np.ndarray]:
        """``n -> hat f(n)``, band-limited to ``|n| < K/2``."""
        coeff = np.fft.fft(self.values) / self.K
        K = self.K

        def hat(n):
            n = np.asarray(n)
            out = coeff[np.mod(n, K)]
            return np.where(np.abs(n) < K / 2, out, 0)
        return hat


def random_elliptic_symbol(rng, winding: int, K: int = 1024, modes: int = 4,
                           scale: float = 0.5) -> SymbolOnCircle:
    """``e^{i k theta} exp(p(theta))`` for a random real trigonometric polynomial ``p``."""
    th = 2 * np.pi * np.arange(K) / K
    p = np.zeros(K)
    for m in range(1, modes + 1):
        a, b = rng.standard_normal(2) * scale / m
        p += a * np.cos(m * th) + b * np.sin(m * th)
    phase = np.zeros(K)
    for m in range(1, modes + 1):
        a, b = rng.standard_normal(2) * scale / m
        phase += a * np.cos(m * th) + b * np.sin(m * th)
    return SymbolOnCircle(np.exp(1j * winding * th + p + 1j * phase))


def winding_number(symbol: SymbolOnCircle) -> int:
    """Total increment of ``arg f`` over the circle divided by ``2 pi``."""
    if not symbol.elliptic:
        raise NonEllipticSymbolError(f"symbol vanishes on the grid (min |f| = {symbol.min_modulus:.3g})")
    v = symbol.values
    steps = np.angle(np.roll(v, -1) / v)
    worst = float(np.abs(steps).max())
    if worst > MAX_PHASE_STEP:
        raise RefinementNeeded(f"phase step {worst:.3g} between neighbouring nodes exceeds "
                               f"{MAX_PHASE_STEP:.3g}; sample the symbol more finely")
    w = steps.sum() / (2 * np.pi)
    if abs(w - round(w)) > WINDING_INTEGER_TOL:
        raise RefinementNeeded(f"winding sum {w!r} is not an integer")
    return int(round(w))


def _edge(n_modes: int) -> np.ndarray:
    w = max(2, n_modes // 10)
    m = np.zeros(n_modes, dtype=bool)
    m[-w:] = True
    return m


def toeplitz(symbol: SymbolOnCircle, M: int) -> DiscretizedOperator:
    """``T_f = P f P`` on the Fourier modes ``0..M``; the top modes form the truncation layer."""
    if not symbol.elliptic:
        raise NonEllipticSymbolError("Toeplitz operators are built only for elliptic symbols")
    k = np.arange(M + 1)
    mat = symbol.fourier()(k[:, None] - k[None, :])
    edge = _edge(M + 1)
    return DiscretizedOperator(mat, None, "Toeplitz", edge, edge)


# ---------------------------------------------------------------------------
# deformation family


def smooth_step(x):
    """0 for ``x <= 0``, 1 for ``x >= 1``, cosine ramp in between."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return 0.5 - 0.5 * np.cos(np.pi * x)


@dataclass
class PhaseSpaceSymbol:
    """An order-0 symbol ``f(theta, xi)`` sampled on ``theta_k`` and a ``xi`` grid.

    Values for ``|xi|`` beyond the grid are clamped to the boundary columns.
    """

    values: np.ndarray   # shape (K, J)
    xi: np.ndarray       # increasing, shape (J,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.xi = np.asarray(self.xi, dtype=float)
        if self.values.shape != (self.values.shape[0], len(self.xi)):
            raise ValueError("values must have one column per xi sample")

    @classmethod
    def from_function(cls, fn, K: int = 512, xi=None) -> "PhaseSpaceSymbol":
        xi = np.linspace(-4, 4, 161) if xi is None else np.asarray(xi, dtype=float)
        th = 2 * np.pi * np.arange(K) / K
        return cls(fn(th[:, None], xi[None, :]), xi)

    @classmethod
    def from_circle_symbol(cls, symbol: SymbolOnCircle, ramp: float = 1.0) -> "PhaseSpaceSymbol":
        """``f`` on the positive half ``xi >= ramp``, 1 on ``xi <= 0``, cosine interpolation between.

        Elliptic in the order-0 sense: the values at large ``|xi|`` are
        ``f(theta)`` and 1, both invertible.
        """
        xi = np.concatenate([[-1.0], np.linspace(0, ramp, 33), [ramp + 1.0]])
        chi = smooth_step(xi / ramp)
        vals = chi[None, :] * symbol.values[:, None] + (1 - chi[None, :])
        return cls(vals, xi)

    @property
    def K(self) -> int:
        return self.values.shape[0]

    def at(self, xi):
        """Columns ``f(., xi_j)`` for arbitrary ``xi`` by linear interpolation with clamping."""
        xi = np.clip(np.asarray(xi, dtype=float), self.xi[0], self.xi[-1])
        j = np.clip(np.searchsorted(self.xi, xi) - 1, 0, len(self.xi) - 2)
        w = (xi - self.xi[j]) / (self.xi[j + 1] - self.xi[j])
        return self.values[:, j] * (1 - w) + self.values[:, j + 1] * w

    def is_elliptic(self) -> bool:
        """Invertible at both ends of the ``xi`` range."""
        return bool(np.abs(self.values[:, 0]).min() > 0 and np.abs(self.values[:, -1]).min() > 0)

    def endpoint_symbols(self):
        return SymbolOnCircle(self.values[:, -1]), SymbolOnCircle(self.values[:, 0])


@dataclass
class DeformationFamily:
    symbol: PhaseSpaceSymbol
    M: int

    def __post_init__(self):
        if not self.symbol.is_elliptic():
            raise NonEllipticSymbolError("symbol is not invertible for large |xi|")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def operator(self, t: float) -> DiscretizedOperator:
        """``P(x, tD)`` on modes ``-M..M``: entry ``(j, k)`` is the ``(j-k)``-th Fourier
        coefficient of ``theta -> f(theta, t k)``."""
        if not 0 < t <= 1:
            raise ValueError("t must lie in (0, 1]")
        k = self.modes
        cols = self.symbol.at(t * k)                     # (K, 2M+1)
        K = self.symbol.K
        coeff = np.fft.fft(cols, axis=0) / K             # coeff[n mod K, k]
        n = k[:, None] - k[None, :]
        mat = coeff[np.mod(n, K), np.arange(len(k))[None, :]]
        mat = np.where(np.abs(n) < K / 2, mat, 0)
        edge = np.abs(k) > self.M - max(2, (2 * self.M + 1) // 20)
        return DiscretizedOperator(mat, None, f"P(x, {t:g} D)", edge, edge)

    def endpoint(self) -> np.ndarray:
        """The ``t = 0`` datum: the symbol itself on the phase-space grid."""
        return self.symbol.values

    def index(self, t: float, **kw) -> IndexReport:
        return numerical_index(self.operator(t), **kw)

    def scan(self, ts=(1.0, 0.5, 0.1), **kw) -> list[IndexReport]:
        return [self.index(t, **kw) for t in ts]


def deformation_family(symbol, M: int = 128) -> DeformationFamily:
    if isinstance(symbol, SymbolOnCircle):
        symbol = PhaseSpaceSymbol.from_circle_symbol(symbol)
    return DeformationFamily(symbol, M)


@dataclass
class IndexTheoremReport:
    analytical: int
    topological: int
    equal: bool
    gap_ratio: float
    reliable: bool

    def as_dict(self):
        return {"analytical": self.analytical, "topological": self.topological, "equal": self.equal,
                "gap_ratio": self.gap_ratio, "reliable": self.reliable}


def topological_index(symbol: SymbolOnCircle) -> int:
    return -winding_number(symbol)


def analytical_index(symbol: SymbolOnCircle, M: int = 128) -> IndexReport:
    return deformation_family(symbol, M).index(1.0)


def verify_index_theorem(symbol: SymbolOnCircle, M: int = 128) -> IndexTheoremReport:
    topo = topological_index(symbol)
    rep = analytical_index(symbol, M)
    gap = rep.gap_ratio if math.isfinite(rep.gap_ratio) else float(np.finfo(float).max)
    return IndexTheoremReport(rep.index, topo, rep.index == topo, gap, rep.reliable)
