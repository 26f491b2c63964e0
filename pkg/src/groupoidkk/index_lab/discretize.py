"""Finite-difference truncations of the ladder operators and the Bott-Dirac operator.

Derivatives use the Wilson-corrected central difference
``D = D_c + (h/2) Lap``, which is the forward difference
``(f_{j+1} - f_j) / h`` with a Dirichlet condition beyond the last node.  A
plain central difference has a doubler: the alternating mode ``(-1)^j g_j``
turns the kernel of ``d/dx + x`` into a kernel of ``-d/dx + x`` and the
discrete index collapses to 0.  The Wilson term lifts that mode to
singular values of order ``2/h``.

Every operator records which coordinates lie in the truncation layer near
the edge of the grid (``domain_boundary`` / ``codomain_boundary``).
Near-kernel vectors concentrated there are truncation artefacts, not
approximations of continuum kernel vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_GRID_POINTS_2D = 2 ** 14


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int

    def __post_init__(self):
        if self.N < 16:
            raise GridError(f"need at least 16 nodes, got {self.N}")
        if not self.L > 0:
            raise GridError("half-width must be positive")

    @property
    def h(self) -> float:
        return 2 * self.L / (self.N - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.N)

    def boundary_mask(self, width: int | None = None) -> np.ndarray:
        """Nodes within ``width`` (default ``max(2, N // 10)``) of either end."""
        w = max(2, self.N // 10) if width is None else width
        m = np.zeros(self.N, dtype=bool)
        m[:w] = True
        m[-w:] = True
        return m

    def refined(self) -> "Grid1D":
        """Double both the half-width and the point count."""
        return Grid1D(2 * self.L, 2 * self.N)


@dataclass
class DiscretizedOperator:
    matrix: np.ndarray
    grid: object
    label: str
    domain_boundary: np.ndarray | None = field(default=None, repr=False)
    codomain_boundary: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    def adjoint(self) -> "DiscretizedOperator":
        return DiscretizedOperator(self.matrix.conj().T, self.grid, f"({self.label})^*",
                                   self.codomain_boundary, self.domain_boundary)


def difference(grid: Grid1D, scheme: str = "wilson") -> np.ndarray:
    """Matrix of ``d/dx`` with Dirichlet truncation."""
    n, h = grid.N, grid.h
    if scheme == "wilson":
        return (np.eye(n, k=1) - np.eye(n)) / h
    if scheme == "central":
        return (np.eye(n, k=1) - np.eye(n, k=-1)) / (2 * h)
    raise ValueError(f"unknown scheme {scheme!r}")


def second_difference(grid: Grid1D) -> np.ndarray:
    n, h = grid.N, grid.h
    return (np.eye(n, k=1) + np.eye(n, k=-1) - 2 * np.eye(n)) / h ** 2


def annihilator(grid: Grid1D, scheme: str = "wilson") -> DiscretizedOperator:
    """``d/dx + x``."""
    if scheme == "wilson":
        check_ladder_resolution(grid)
    m = difference(grid, scheme) + np.diag(grid.nodes)
    b = grid.boundary_mask()
    return DiscretizedOperator(m.astype(complex), grid, "d/dx + x", b, b)


def creation(grid: Grid1D, scheme: str = "wilson") -> DiscretizedOperator:
    """``-d/dx + x`` realised as the adjoint matrix of the annihilator."""
    op = annihilator(grid, scheme).adjoint()
    op.label = "-d/dx + x"
    return op


def hamiltonian(grid: Grid1D) -> DiscretizedOperator:
    """``H = -d^2/dx^2 + x^2``; its lowest eigenvalue approximates 1."""
    m = -second_difference(grid) + np.diag(grid.nodes ** 2)
    b = grid.boundary_mask()
    return DiscretizedOperator(m.astype(complex), grid, "-d^2/dx^2 + x^2", b, b)


def check_ladder_resolution(grid: Grid1D) -> None:
    """Require ``h * L < 2``.

    The discrete ladder recursion ``g_{j+1} = (1 - h x_j) g_j`` only decays
    where ``h |x| < 2``; beyond that the Gaussian kernel and the edge mode
    both spread over the grid and bulk/edge classification fails.
    """
    if grid.h * grid.L >= 2:
        raise GridError(f"grid too coarse for the ladder operators: h*L = {grid.h * grid.L:.3g} >= 2")


def _edge2d(grid: Grid1D):
    b1 = grid.boundary_mask()
    return np.logical_or.outer(b1, b1).reshape(-1)


def bott_dirac(grid: Grid1D, constant_multipliers: bool = False,
               allow_large: bool = False) -> DiscretizedOperator:
    """The odd corner ``(D_+, c_-; c_+, -D_-)`` on ``L^2(R^2)^2``, coordinates ordered ``(ix, iy)``.

    ``D_+ = d/dx + i d/dy`` and ``D_- = -d/dx + i d/dy`` use central
    differences; ``c_+ = x - iy`` and ``c_- = x + iy`` carry the Wilson term
    ``(h/2)(Lap_x -+ i Lap_y)``.  With ``constant_multipliers`` both ``c`` are
    replaced by 1 (the Wilson term stays).
    """
    if grid.N ** 2 > MAX_GRID_POINTS_2D and not allow_large:
        raise GridError(f"{grid.N}x{grid.N} grid exceeds the memory guard of {MAX_GRID_POINTS_2D} points")
    check_ladder_resolution(grid)
    eye = np.eye(grid.N)
    dc = difference(grid, "central")
    lap = second_difference(grid)
    x = np.diag(grid.nodes)
    dx, dy = np.kron(dc, eye), np.kron(eye, dc)
    wx, wy = grid.h / 2 * np.kron(lap, eye), grid.h / 2 * np.kron(eye, lap)
    if constant_multipliers:
        cp = cm = np.eye(grid.N ** 2)
    else:
        cp = np.kron(x, eye) - 1j * np.kron(eye, x)
        cm = np.kron(x, eye) + 1j * np.kron(eye, x)
    m = np.block([[dx + 1j * dy, cm + wx + 1j * wy],
                  [cp + wx - 1j * wy, dx - 1j * dy]])
    b = np.concatenate([_edge2d(grid)] * 2)
    return DiscretizedOperator(m, grid, "Bott-Dirac D_+", b, b)


def spinor_rotation(n_points: int) -> np.ndarray:
    """Rotation of angle pi/4 acting on the two spinor components."""
    c = np.sqrt(0.5)
    return np.kron(np.array([[c, -c], [c, c]]), np.eye(n_points))


def rotated_bott_dirac(grid: Grid1D, allow_large: bool = False) -> DiscretizedOperator:
    """``rho D_+ rho`` for the pi/4 spinor rotation ``rho``; unitary factors leave the index unchanged."""
    op = bott_dirac(grid, allow_large=allow_large)
    r = spinor_rotation(grid.N ** 2)
    return DiscretizedOperator(r @ op.matrix @ r, grid, "rho D_+ rho", op.domain_boundary, op.codomain_boundary)


def ladder_product(grid: Grid1D) -> DiscretizedOperator:
    """``(i(1 x A), A^* x 1; A x 1, i(1 x A^*))`` with ``A`` the 1D annihilator.

    This is the graded product of two copies of the ladder operator, and it
    equals ``rotated_bott_dirac`` up to rounding.
    """
    a = annihilator(grid).matrix
    ah = a.conj().T
    eye = np.eye(grid.N)
    m = np.block([[1j * np.kron(eye, a), np.kron(ah, eye)],
                  [np.kron(a, eye), 1j * np.kron(eye, ah)]])
    b = np.concatenate([_edge2d(grid)] * 2)
    return DiscretizedOperator(m, grid, "graded ladder product", b, b)
