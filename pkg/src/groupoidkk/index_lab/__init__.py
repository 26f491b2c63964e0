"""Discretized analytic operators and numerical Fredholm indices."""

from .circle import (DeformationFamily, IndexTheoremReport, NonEllipticSymbolError, PhaseSpaceSymbol,
                     RefinementNeeded, SymbolOnCircle, analytical_index, deformation_family,
                     random_elliptic_symbol, toeplitz, topological_index, verify_index_theorem,
                     winding_number)
from .discretize import (DiscretizedOperator, Grid1D, GridError, annihilator, bott_dirac, creation,
                         hamiltonian, ladder_product, rotated_bott_dirac, spinor_rotation)
from .experiments import ExperimentResult, run_experiment
from .spectral import IndexReport, UnreliableIndexWarning, numerical_index

__all__ = [
    "DeformationFamily", "DiscretizedOperator", "ExperimentResult", "Grid1D", "GridError",
    "IndexReport", "IndexTheoremReport", "NonEllipticSymbolError", "PhaseSpaceSymbol",
    "RefinementNeeded", "SymbolOnCircle", "UnreliableIndexWarning", "analytical_index", "annihilator",
    "bott_dirac", "creation", "deformation_family", "hamiltonian", "ladder_product",
    "numerical_index", "random_elliptic_symbol", "rotated_bott_dirac", "run_experiment",
    "spinor_rotation", "toeplitz", "topological_index", "verify_index_theorem", "winding_number",
]
