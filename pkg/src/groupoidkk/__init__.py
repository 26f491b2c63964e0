"""Finite groupoid C*-algebras, Hilbert modules, Kasparov modules and index experiments."""

from ._kernels import BACKEND
from .groupoid import (FiniteGroupoid, GroupoidError, action_groupoid, cyclic_groupoid, disjoint_union,
                       orbits, pair_groupoid, pullback_groupoid, relation_groupoid, space_groupoid,
                       validate)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "FiniteGroupoid", "GroupoidError", "__version__", "action_groupoid", "cyclic_groupoid",
    "disjoint_union", "orbits", "pair_groupoid", "pullback_groupoid", "relation_groupoid",
    "space_groupoid", "validate",
]
