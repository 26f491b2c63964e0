"""Finite groupoids stored as explicit tables.

Units and arrows carry dense integer ids.  Composition is stored for the
composable pairs only; ``compose`` raises :class:`NotComposableError` on any
other pair.  The convention throughout is ``src(a) == tgt(b)`` for the
product ``a * b`` (so ``a`` is applied after ``b``).
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels


class GroupoidError(Exception):
    """Base class for groupoid-level failures."""


class GroupoidStructureError(GroupoidError):
    """Tables are malformed (ids out of range, wrong lengths)."""


class NotComposableError(GroupoidError):
    def __init__(self, a, b):
        super().__init__(f"arrows {a} and {b} are not composable")
        self.pair = (a, b)


class PreconditionError(GroupoidError, ValueError):
    """Constructor input violates its precondition; ``witness`` names the culprit."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Violation:
    axiom: str
    arrows: tuple
    detail: str = ""

    def as_dict(self):
        return {"axiom": self.axiom, "arrows": [int(a) for a in self.arrows], "detail": self.detail}


class FiniteGroupoid:
    """A finite groupoid given by its structure tables.

    Parameters
    ----------
    n_units : int
    src, tgt, inv : sequence of int, one entry per arrow
    compose : mapping ``(a, b) -> ab`` over the composable pairs
    unit_embed : optional sequence, unit -> arrow.  When omitted, the unit
        arrow at ``x`` is the idempotent loop at ``x`` (``e * e == e``).
    """

    def __init__(self, n_units, src, tgt, inv, compose, unit_embed=None,
                 arrow_labels=None, unit_labels=None):
        self.n_units = int(n_units)
        self.src = _int_array(src, "src")
        self.tgt = _int_array(tgt, "tgt")
        self.inv = _int_array(inv, "inv")
        m = len(self.src)
        self.n_arrows = m
        if len(self.tgt) != m or len(self.inv) != m:
            raise GroupoidStructureError("src, tgt and inv must have one entry per arrow")
        if self.n_units < 1 or m < 1:
            raise GroupoidStructureError("a groupoid needs at least one unit and one arrow")
        for name, arr, bound in (("src", self.src, self.n_units), ("tgt", self.tgt, self.n_units),
                                 ("inv", self.inv, m)):
            if arr.size and (arr.min() < 0 or arr.max() >= bound):
                bad = int(np.nonzero((arr < 0) | (arr >= bound))[0][0])
                raise GroupoidStructureError(f"{name}[{bad}] = {arr[bad]} out of range")

        table = np.full((m, m), -1, dtype=np.int64)
        items = compose.items() if isinstance(compose, Mapping) else compose
        for key, c in items:
            a, b = key
            for v in (a, b, c):
                if not 0 <= int(v) < m:
                    raise GroupoidStructureError(f"composition entry {(a, b, c)} out of range")
            table[int(a), int(b)] = int(c)
        self._table = table
        self._table.setflags(write=False)

        if unit_embed is None:
            unit_embed = self._find_units()
        self.unit_embed = _int_array(unit_embed, "unit_embed")
        if len(self.unit_embed) != self.n_units:
            raise GroupoidStructureError("unit_embed needs one entry per unit")
        if np.any(self.unit_embed >= m):
            raise GroupoidStructureError("unit_embed refers to a missing arrow")

        self.arrow_labels = list(arrow_labels) if arrow_labels is not None else list(range(m))
        self.unit_labels = list(unit_labels) if unit_labels is not None else list(range(self.n_units))
        for arr in (self.src, self.tgt, self.inv, self.unit_embed):
            arr.setflags(write=False)
        self._fibers = None

    def _find_units(self):
        units = np.full(self.n_units, -1, dtype=np.int64)
        for a in range(self.n_arrows):
            x = self.src[a]
            if self.tgt[a] == x and self._table[a, a] == a and units[x] < 0:
                units[x] = a
        return units

    # -- table access -------------------------------------------------------

    @property
    def table(self):
        """Dense composition table with -1 on non-composable pairs (read-only)."""
        return self._table

    def composable(self, a, b):
        return self._table[a, b] >= 0

    def compose(self, a, b):
        c = self._table[a, b]
        if c < 0:
            raise NotComposableError(a, b)
        return int(c)

    def composable_pairs(self):
        a, b = np.nonzero(self._table >= 0)
        return list(zip(a.tolist(), b.tolist()))

    def unit(self, x):
        return int(self.unit_embed[x])

    def is_unit_arrow(self, a):
        return self.unit_embed[self.src[a]] == a

    # -- fibers -------------------------------------------------------------

    def _build_fibers(self):
        order = np.argsort(self.src, kind="stable")
        counts = np.bincount(self.src, minlength=self.n_units)
        ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._fibers = (ptr, order.astype(np.int64))

    @property
    def fiber_index(self):
        """CSR pair ``(ptr, arrows)`` listing each s-fiber ``G_x`` in arrow order."""
        if self._fibers is None:
            self._build_fibers()
        return self._fibers

    def source_fiber(self, x):
        ptr, arrows = self.fiber_index
        return arrows[ptr[x]:ptr[x + 1]]

    def range_fiber(self, x):
        return np.nonzero(self.tgt == x)[0]

    def hom(self, x, y):
        """Arrows from ``x`` to ``y``."""
        return np.nonzero((self.src == x) & (self.tgt == y))[0]

    def isotropy(self, x):
        return self.hom(x, x)

    # -- misc ---------------------------------------------------------------

    def fingerprint(self):
        h = hashlib.sha256()
        for arr in (np.array([self.n_units]), self.src, self.tgt, self.inv, self._table):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]

    def same_as(self, other):
        return self is other or (
            isinstance(other, FiniteGroupoid) and self.fingerprint() == other.fingerprint()
        )

    def subgroupoid(self, units):
        """Full subgroupoid on the given units, returned with the old arrow ids."""
        units = sorted(int(u) for u in units)
        umap = {u: i for i, u in enumerate(units)}
        keep = np.nonzero(np.isin(self.src, units) & np.isin(self.tgt, units))[0]
        amap = {int(a): i for i, a in enumerate(keep)}
        comp = {}
        for a in keep:
            for b in keep:
                c = self._table[a, b]
                if c >= 0:
                    comp[(amap[int(a)], amap[int(b)])] = amap[int(c)]
        sub = FiniteGroupoid(
            len(units),
            [umap[int(self.src[a])] for a in keep],
            [umap[int(self.tgt[a])] for a in keep],
            [amap[int(self.inv[a])] for a in keep],
            comp,
            unit_embed=[amap[int(self.unit_embed[u])] for u in units],
            arrow_labels=[self.arrow_labels[a] for a in keep],
            unit_labels=[self.unit_labels[u] for u in units],
        )
        return sub, keep

    def with_tables(self, **changes):
        """Copy with some tables replaced; used for fault injection."""
        data = {
            "src": self.src.copy(), "tgt": self.tgt.copy(), "inv": self.inv.copy(),
            "compose": {(a, b): int(self._table[a, b]) for a, b in self.composable_pairs()},
            "unit_embed": self.unit_embed.copy(),
        }
        data.update(changes)
        return FiniteGroupoid(self.n_units, data["src"], data["tgt"], data["inv"], data["compose"],
                              unit_embed=data["unit_embed"], arrow_labels=self.arrow_labels,
                              unit_labels=self.unit_labels)

    def __repr__(self):
        return f"FiniteGroupoid(units={self.n_units}, arrows={self.n_arrows})"


def _int_array(values, name):
    try:
        arr = np.array(values, dtype=np.int64).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise GroupoidStructureError(f"{name} is not an integer table") from exc
    return arr


# ---------------------------------------------------------------------------
# validation


def validate(g: FiniteGroupoid, limit: int = 64) -> list[Violation]:
    """Exhaustively check the groupoid axioms; an empty list means ``g`` is a groupoid."""
    out: list[Violation] = []
    m, table = g.n_arrows, g.table
    src, tgt, inv = g.src, g.tgt, g.inv

    seen = {}
    for x in range(g.n_units):
        e = int(g.unit_embed[x])
        if e < 0:
            out.append(Violation("unit-embedding", (), f"unit {x} has no identity arrow"))
            continue
        if src[e] != x or tgt[e] != x:
            out.append(Violation("unit-embedding", (e,), f"identity of unit {x} is not a loop at {x}"))
        if e in seen:
            out.append(Violation("unit-embedding", (e,), f"units {seen[e]} and {x} share arrow {e}"))
        seen[e] = x

    # defined iff src(a) == tgt(b)
    should = src[:, None] == tgt[None, :]
    defined = table >= 0
    for a, b in zip(*np.nonzero(should != defined)):
        what = "missing product" if should[a, b] else "product on non-composable pair"
        out.append(Violation("composability", (int(a), int(b)), what))
        if len(out) >= limit:
            return out

    a_idx, b_idx = np.nonzero(defined & should)
    c_idx = table[a_idx, b_idx]
    bad = (tgt[c_idx] != tgt[a_idx]) | (src[c_idx] != src[b_idx])
    for a, b in zip(a_idx[bad], b_idx[bad]):
        out.append(Violation("compose-source-target", (int(a), int(b)),
                             "range/source of the product are wrong"))

    clean = table.copy()
    clean[~should] = -1
    for a, b, c in _kernels.associativity_violations(np.ascontiguousarray(clean), limit):
        out.append(Violation("associativity", (int(a), int(b), int(c)), "(ab)c != a(bc)"))

    units_ok = np.all(g.unit_embed >= 0)
    for a in range(m):
        if units_ok:
            left = table[g.unit_embed[tgt[a]], a]
            right = table[a, g.unit_embed[src[a]]]
            if left != a or right != a:
                out.append(Violation("unit-law", (a,), "identity does not act trivially"))
        if inv[inv[a]] != a:
            out.append(Violation("inverse-involution", (a,), "inv(inv(a)) != a"))
        if src[inv[a]] != tgt[a] or tgt[inv[a]] != src[a]:
            out.append(Violation("inverse-source", (a,), "inverse has wrong source or range"))
        if units_ok:
            p, q = table[a, inv[a]], table[inv[a], a]
            if p != g.unit_embed[tgt[a]] or q != g.unit_embed[src[a]]:
                out.append(Violation("inverse-law", (a,), "a * inv(a) is not the identity"))
        if len(out) >= limit:
            break
    return out[:limit]


def is_groupoid(g):
    return not validate(g, limit=1)


# ---------------------------------------------------------------------------
# constructors


def pair_groupoid(n: int) -> FiniteGroupoid:
    """Arrows ``(x, y)`` from ``y`` to ``x``; ``(x, y)(y, z) = (x, z)``."""
    if n < 1:
        raise PreconditionError("the pair groupoid needs at least one point")
    aid = lambda x, y: x * n + y
    src, tgt, inv, labels = [], [], [], []
    for x in range(n):
        for y in range(n):
            src.append(y)
            tgt.append(x)
            inv.append(aid(y, x))
            labels.append((x, y))
    comp = {(aid(x, y), aid(y, z)): aid(x, z) for x in range(n) for y in range(n) for z in range(n)}
    return FiniteGroupoid(n, src, tgt, inv, comp, unit_embed=[aid(x, x) for x in range(n)],
                          arrow_labels=labels)


def space_groupoid(n: int) -> FiniteGroupoid:
    """The set ``{0..n-1}`` as a groupoid with identity arrows only."""
    if n < 1:
        raise PreconditionError("the space groupoid needs at least one point")
    return FiniteGroupoid(n, range(n), range(n), range(n), {(x, x): x for x in range(n)},
                          unit_embed=range(n))


def _check_group_table(mult):
    mult = np.asarray(mult, dtype=np.int64)
    k = mult.shape[0]
    if mult.shape != (k, k) or mult.min() < 0 or mult.max() >= k:
        raise PreconditionError("group table must be a square table of element ids")
    ids = [e for e in range(k) if np.all(mult[e] == np.arange(k)) and np.all(mult[:, e] == np.arange(k))]
    if not ids:
        raise PreconditionError("group table has no identity")
    e = ids[0]
    inverse = np.full(k, -1, dtype=np.int64)
    for g in range(k):
        hits = np.nonzero(mult[g] == e)[0]
        if len(hits) == 0:
            raise PreconditionError(f"element {g} has no inverse", witness=(g,))
        inverse[g] = hits[0]
    for a in range(k):
        for b in range(k):
            ab = mult[a, b]
            if not np.all(mult[ab] == mult[a, mult[b]]):
                c = int(np.nonzero(mult[ab] != mult[a, mult[b]])[0][0])
                raise PreconditionError(f"group table is not associative at {(a, b, c)}", witness=(a, b, c))
    return mult, e, inverse


def cyclic_group_table(m: int) -> np.ndarray:
    r = np.arange(m)
    return (r[:, None] + r[None, :]) % m


def group_groupoid(mult) -> FiniteGroupoid:
    """A finite group, given by its multiplication table, as a one-unit groupoid."""
    mult, e, inverse = _check_group_table(mult)
    k = mult.shape[0]
    comp = {(a, b): int(mult[a, b]) for a in range(k) for b in range(k)}
    return FiniteGroupoid(1, [0] * k, [0] * k, inverse, comp, unit_embed=[e])


def cyclic_groupoid(m: int) -> FiniteGroupoid:
    if m < 1:
        raise PreconditionError("cyclic group order must be positive")
    return group_groupoid(cyclic_group_table(m))


def action_groupoid(mult, action) -> FiniteGroupoid:
    """Groupoid of a group action ``action[g, x] = g.x``.

    Arrows are pairs ``(g, x)`` from ``x`` to ``g.x``, and
    ``(h, g.x)(g, x) = (hg, x)``.
    """
    mult, e, inverse = _check_group_table(mult)
    action = np.asarray(action, dtype=np.int64)
    k = mult.shape[0]
    if action.ndim != 2 or action.shape[0] != k:
        raise PreconditionError("action table must have one row per group element")
    n = action.shape[1]
    if action.min() < 0 or action.max() >= n:
        raise PreconditionError("action table maps outside the set")
    for x in range(n):
        if action[e, x] != x:
            raise PreconditionError(f"identity moves point {x}", witness=(e, x))
    for g in range(k):
        for h in range(k):
            for x in range(n):
                if action[g, action[h, x]] != action[mult[g, h], x]:
                    raise PreconditionError(
                        f"g.(h.x) != (gh).x for (g, h, x) = {(g, h, x)}", witness=(g, h, x))
    aid = lambda g, x: g * n + x
    src, tgt, inv, labels = [], [], [], []
    for g in range(k):
        for x in range(n):
            src.append(x)
            tgt.append(int(action[g, x]))
            inv.append(aid(int(inverse[g]), int(action[g, x])))
            labels.append((g, x))
    comp = {}
    for h in range(k):
        for g in range(k):
            for x in range(n):
                comp[(aid(h, int(action[g, x])), aid(g, x))] = aid(int(mult[h, g]), x)
    return FiniteGroupoid(n, src, tgt, inv, comp, unit_embed=[aid(e, x) for x in range(n)],
                          arrow_labels=labels)


def relation_groupoid(n: int, pairs: Iterable[tuple[int, int]]) -> FiniteGroupoid:
    """Graph of an equivalence relation on ``{0..n-1}``, given as its set of pairs."""
    rel = {(int(a), int(b)) for a, b in pairs}
    for a, b in rel:
        if not (0 <= a < n and 0 <= b < n):
            raise PreconditionError(f"pair {(a, b)} leaves the set", witness=(a, b))
    for x in range(n):
        if (x, x) not in rel:
            raise PreconditionError(f"not reflexive: missing {(x, x)}", witness=(x, x))
    for a, b in sorted(rel):
        if (b, a) not in rel:
            raise PreconditionError(f"not symmetric: missing {(b, a)}", witness=(b, a))
    for a, b in sorted(rel):
        for c in range(n):
            if (b, c) in rel and (a, c) not in rel:
                raise PreconditionError(f"not transitive: missing {(a, c)}", witness=(a, c))
    arrows = sorted(rel)
    aid = {p: i for i, p in enumerate(arrows)}
    comp = {(aid[(x, y)], aid[(y, z)]): aid[(x, z)] for (x, y) in arrows for (yy, z) in arrows if yy == y}
    return FiniteGroupoid(n, [y for x, y in arrows], [x for x, y in arrows],
                          [aid[(y, x)] for x, y in arrows], comp,
                          unit_embed=[aid[(x, x)] for x in range(n)], arrow_labels=arrows)


def relation_from_classes(classes: Sequence[Sequence[int]]) -> FiniteGroupoid:
    n = sum(len(c) for c in classes)
    return relation_groupoid(n, [(a, b) for c in classes for a in c for b in c])


def disjoint_union(*parts: FiniteGroupoid) -> FiniteGroupoid:
    src, tgt, inv, units, comp, labels = [], [], [], [], {}, []
    ushift = ashift = 0
    for p in parts:
        src += (p.src + ushift).tolist()
        tgt += (p.tgt + ushift).tolist()
        inv += (p.inv + ashift).tolist()
        units += (p.unit_embed + ashift).tolist()
        for a, b in p.composable_pairs():
            comp[(a + ashift, b + ashift)] = int(p.table[a, b]) + ashift
        labels += p.arrow_labels
        ushift += p.n_units
        ashift += p.n_arrows
    return FiniteGroupoid(ushift, src, tgt, inv, comp, unit_embed=units, arrow_labels=labels)


def pullback_groupoid(g: FiniteGroupoid, phi: Sequence[int]) -> FiniteGroupoid:
    """Pull ``g`` back along a surjection ``phi`` from ``{0..len(phi)-1}`` onto its units.

    Arrows are triples ``(x, gamma, y)`` with ``phi(x) = r(gamma)`` and
    ``phi(y) = s(gamma)``.
    """
    phi = np.asarray(phi, dtype=np.int64)
    if phi.size and (phi.min() < 0 or phi.max() >= g.n_units):
        raise PreconditionError("phi maps outside the unit space")
    missing = sorted(set(range(g.n_units)) - set(phi.tolist()))
    if missing:
        raise PreconditionError(f"phi is not surjective; uncovered units {missing}", witness=tuple(missing))
    n = len(phi)
    triples = []
    for x in range(n):
        for y in range(n):
            for gam in g.hom(phi[y], phi[x]):
                triples.append((x, int(gam), y))
    aid = {t: i for i, t in enumerate(triples)}
    by_range = {}
    for t in triples:
        by_range.setdefault(t[0], []).append(t)
    comp = {}
    for t1 in triples:
        x, g1, y = t1
        for t2 in by_range.get(y, ()):
            comp[(aid[t1], aid[t2])] = aid[(x, g.compose(g1, t2[1]), t2[2])]
    return FiniteGroupoid(
        n,
        [t[2] for t in triples],
        [t[0] for t in triples],
        [aid[(y, int(g.inv[gam]), x)] for x, gam, y in triples],
        comp,
        unit_embed=[aid[(x, g.unit(phi[x]), x)] for x in range(n)],
        arrow_labels=triples,
    )


def uniform_cover(n_units: int, k: int) -> np.ndarray:
    """The map ``{0..k*n-1} -> {0..n-1}`` sending ``i`` to ``i // k``."""
    return np.repeat(np.arange(n_units), k)


# ---------------------------------------------------------------------------
# morphisms


@dataclass
class GroupoidMorphism:
    source: FiniteGroupoid
    target: FiniteGroupoid
    arrow_map: np.ndarray
    unit_map: np.ndarray

    def __post_init__(self):
        self.arrow_map = np.asarray(self.arrow_map, dtype=np.int64)
        self.unit_map = np.asarray(self.unit_map, dtype=np.int64)

    def verify(self) -> list[Violation]:
        s, t, f, f0 = self.source, self.target, self.arrow_map, self.unit_map
        out = []
        if len(f) != s.n_arrows or len(f0) != s.n_units:
            return [Violation("morphism-shape", (), "maps have the wrong length")]
        for a in range(s.n_arrows):
            fa = int(f[a])
            if t.src[fa] != f0[s.src[a]] or t.tgt[fa] != f0[s.tgt[a]]:
                out.append(Violation("morphism-source-target", (a,), "does not cover the unit map"))
            if f[s.inv[a]] != t.inv[fa]:
                out.append(Violation("morphism-inverse", (a,), "does not commute with inversion"))
        for a, b in s.composable_pairs():
            if not t.composable(f[a], f[b]) or t.compose(f[a], f[b]) != f[s.compose(a, b)]:
                out.append(Violation("morphism-product", (a, b), "does not respect composition"))
        return out

    def is_isomorphism(self):
        return (not self.verify()
                and sorted(self.arrow_map.tolist()) == list(range(self.target.n_arrows))
                and sorted(self.unit_map.tolist()) == list(range(self.target.n_units)))


def pullback_projection(g: FiniteGroupoid, pulled: FiniteGroupoid, phi) -> GroupoidMorphism:
    """The morphism ``(x, gamma, y) -> gamma`` over ``phi``."""
    return GroupoidMorphism(pulled, g, [lab[1] for lab in pulled.arrow_labels], phi)


# ---------------------------------------------------------------------------
# orbits


@dataclass
class IsotropyGroup:
    unit: int
    arrows: np.ndarray
    table: np.ndarray  # local indices into ``arrows``

    @property
    def order(self):
        return len(self.arrows)


@dataclass
class OrbitDecomposition:
    orbits: list[tuple[int, ...]]
    orbit_of: np.ndarray
    isotropy: dict[int, IsotropyGroup] = field(repr=False)

    def __len__(self):
        return len(self.orbits)


def orbits(g: FiniteGroupoid) -> OrbitDecomposition:
    orbit_of = np.full(g.n_units, -1, dtype=np.int64)
    adj = [set() for _ in range(g.n_units)]
    for a in range(g.n_arrows):
        adj[g.src[a]].add(int(g.tgt[a]))
    found = []
    for start in range(g.n_units):
        if orbit_of[start] >= 0:
            continue
        idx = len(found)
        orbit_of[start] = idx
        queue, members = deque([start]), [start]
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if orbit_of[y] < 0:
                    orbit_of[y] = idx
                    members.append(y)
                    queue.append(y)
        found.append(tuple(sorted(members)))
    iso = {}
    for x in range(g.n_units):
        arrows = g.isotropy(x)
        local = {int(a): i for i, a in enumerate(arrows)}
        table = np.array([[local[g.compose(a, b)] for b in arrows] for a in arrows], dtype=np.int64)
        iso[x] = IsotropyGroup(x, arrows, table)
    return OrbitDecomposition(found, orbit_of, iso)


def conjugation_isomorphism(g: FiniteGroupoid, x: int, y: int) -> dict[int, int]:
    """Isomorphism ``G_x^x -> G_y^y``, ``h -> gamma h gamma^-1`` for some arrow ``gamma: x -> y``."""
    hom = g.hom(x, y)
    if len(hom) == 0:
        raise GroupoidError(f"units {x} and {y} lie in different orbits")
    gam = int(hom[0])
    gi = int(g.inv[gam])
    return {int(h): g.compose(g.compose(gam, int(h)), gi) for h in g.isotropy(x)}


def is_group_isomorphism(g: FiniteGroupoid, mapping: Mapping[int, int]) -> bool:
    image = list(mapping.values())
    if len(set(image)) != len(image):
        return False
    return all(mapping[g.compose(a, b)] == g.compose(mapping[a], mapping[b]) for a in mapping for b in mapping)


# ---------------------------------------------------------------------------
# saturated restriction


@dataclass
class Restriction:
    """``G|_U`` (``inner``) and ``G|_F`` (``outer``) with the original arrow ids of each."""

    inner: FiniteGroupoid | None
    outer: FiniteGroupoid | None
    inner_arrows: np.ndarray
    outer_arrows: np.ndarray
    inner_units: tuple
    outer_units: tuple

    def __iter__(self):
        return iter((self.inner, self.outer))


def saturation_witness(g: FiniteGroupoid, units) -> int | None:
    """An arrow with exactly one end in ``units``, or ``None`` if the set is saturated."""
    mask = np.zeros(g.n_units, dtype=bool)
    mask[list(units)] = True
    crossing = np.nonzero(mask[g.src] != mask[g.tgt])[0]
    return int(crossing[0]) if len(crossing) else None


def restrict_to_saturated(g: FiniteGroupoid, units) -> Restriction:
    units = sorted({int(u) for u in units})
    if any(not 0 <= u < g.n_units for u in units):
        raise PreconditionError("unit ids out of range")
    bad = saturation_witness(g, units)
    if bad is not None:
        raise PreconditionError(
            f"set is not saturated: arrow {bad} {g.arrow_labels[bad]} crosses its boundary", witness=(bad,))
    rest = [u for u in range(g.n_units) if u not in set(units)]
    inner, inner_ids = g.subgroupoid(units) if units else (None, np.zeros(0, dtype=np.int64))
    outer, outer_ids = g.subgroupoid(rest) if rest else (None, np.zeros(0, dtype=np.int64))
    return Restriction(inner, outer, inner_ids, outer_ids, tuple(units), tuple(rest))
