import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from groupoidkk.groupoid import (action_groupoid, cyclic_group_table, cyclic_groupoid, disjoint_union,
                                 pair_groupoid, pullback_groupoid, relation_from_classes, space_groupoid,
                                 uniform_cover)

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def swap_action():
    return action_groupoid(cyclic_group_table(2), [[0, 1], [1, 0]])


def rotation_action(m, n_points=None):
    """``Z/m`` rotating ``n_points`` (default ``m``) points on a cycle of length ``n_points``."""
    n = m if n_points is None else n_points
    return action_groupoid(cyclic_group_table(m), [[(g + x) % n for x in range(n)] for g in range(m)])


def constructor_zoo():
    """One representative per constructor family, small enough for exhaustive checks."""
    zoo = {f"pair{n}": pair_groupoid(n) for n in range(1, 9)}
    zoo.update({f"z{m}": cyclic_groupoid(m) for m in range(1, 9)})
    zoo["swap"] = swap_action()
    zoo["z2-trivial-on-2"] = action_groupoid(cyclic_group_table(2), [[0, 1], [0, 1]])
    zoo["z3-rot"] = rotation_action(3)
    zoo["z4-on-2"] = rotation_action(4, 2)
    zoo["z6-rot"] = rotation_action(6)
    zoo["z2-on-6"] = action_groupoid(cyclic_group_table(2), [list(range(6)), [1, 0, 3, 2, 5, 4]])
    zoo["space3"] = space_groupoid(3)
    zoo["classes"] = relation_from_classes([[0, 1], [2]])
    zoo["cover2-z2"] = pullback_groupoid(cyclic_groupoid(2), uniform_cover(1, 2))
    zoo["cover3-pair2"] = pullback_groupoid(pair_groupoid(2), uniform_cover(2, 3))
    zoo["cover2-swap"] = pullback_groupoid(swap_action(), uniform_cover(2, 2))
    zoo["union"] = disjoint_union(cyclic_groupoid(2), pair_groupoid(2))
    return zoo


@pytest.fixture(scope="session")
def zoo():
    return constructor_zoo()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def inject_fault(g, rng):
    """Corrupt one table entry of ``g`` with a different in-range value.

    Returns ``(kind, corrupted)``.  ``kind`` names the table that was changed.
    """
    kind = rng.choice(["inv", "compose", "src", "tgt", "unit"]) if g.n_arrows > 1 else "compose-src"
    m = g.n_arrows
    if kind == "compose-src":
        kind = "src"
    if kind == "inv":
        a = int(rng.integers(m))
        inv = g.inv.copy()
        inv[a] = (inv[a] + 1 + int(rng.integers(m - 1))) % m
        return kind, g.with_tables(inv=inv)
    if kind == "compose":
        pairs = g.composable_pairs()
        a, b = pairs[int(rng.integers(len(pairs)))]
        comp = {(x, y): int(g.table[x, y]) for x, y in pairs}
        comp[(a, b)] = (comp[(a, b)] + 1 + int(rng.integers(m - 1))) % m
        return kind, g.with_tables(compose=comp)
    if kind in ("src", "tgt"):
        if g.n_units == 1:
            kind = "inv" if m > 1 else kind
            if kind == "inv":
                return inject_fault_inv(g, rng)
            # single arrow, single unit: drop the only product
            return "compose", g.with_tables(compose={})
        a = int(rng.integers(m))
        arr = getattr(g, kind).copy()
        arr[a] = (arr[a] + 1 + int(rng.integers(g.n_units - 1))) % g.n_units
        return kind, g.with_tables(**{kind: arr})
    ue = g.unit_embed.copy()
    x = int(rng.integers(g.n_units))
    ue[x] = (ue[x] + 1 + int(rng.integers(m - 1))) % m
    return "unit", g.with_tables(unit_embed=ue)


def inject_fault_inv(g, rng):
    m = g.n_arrows
    a = int(rng.integers(m))
    inv = g.inv.copy()
    inv[a] = (inv[a] + 1 + int(rng.integers(m - 1))) % m
    return "inv", g.with_tables(inv=inv)


# ---------------------------------------------------------------------------
# Hilbert-module samples

from groupoidkk.hilbert import HilbertModule, ModuleMap  # noqa: E402
from groupoidkk.matrix_algebra import MatrixAlgebra  # noqa: E402

ALGEBRAS = {"C": MatrixAlgebra([1]), "C2": MatrixAlgebra([1, 1]), "M2": MatrixAlgebra([2]),
            "M2+C": MatrixAlgebra([2, 1])}


def random_entries(rng, algebra, rows, cols):
    return np.array([[algebra.random(rng) for _ in range(cols)] for _ in range(rows)])


def random_module(rng, algebra, n, full=None):
    """``A^n`` or the submodule generated by one or two random elements."""
    if full or (full is None and rng.random() < 0.5):
        return HilbertModule.standard(algebra, n)
    k = int(rng.integers(1, 3))
    return HilbertModule(algebra, n, random_entries(rng, algebra, k, n))


def random_map(rng, source, target):
    """A random A-linear map ``source -> target``: a matrix over A followed by the target projection."""
    ent = random_entries(rng, source.algebra, target.n, source.n)
    raw = ModuleMap.from_entries(source, HilbertModule.standard(target.algebra, target.n), ent)
    return ModuleMap(source, target, target.projection @ raw.matrix)
