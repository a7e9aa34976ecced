"""Finite sets with explicit function tables.

This is the concrete target for every construction in the package: products,
coproducts, (co)equalizers, pullbacks/pushouts, the multi-wedge limits used by
the gluing condition, and the subobject calculus (union/intersection/difference
and images).  Every universal property can be re-verified by enumerating
candidate mediating maps, which is the point of keeping everything tabular.

Atoms are opaque hashable values: strings, ints, or tuples of atoms.  Canonical
orderings always come from the position of an atom in its FinSet, never from
value comparisons, so mixed atom types stay safe to sort.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

from .errors import FinsheafError


class NotParallel(FinsheafError):
    pass


class AmbientMismatch(FinsheafError):
    pass


class ShapeMismatch(FinsheafError):
    pass


@dataclass(frozen=True)
class FinSet:
    """An ordered finite set of distinct atoms."""

    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        index = {}
        for i, a in enumerate(self.elements):
            if a in index:
                raise FinsheafError("duplicate element %r" % (a,))
            index[a] = i
        object.__setattr__(self, "_index", index)

    def index(self, a):
        try:
            return self._index[a]
        except KeyError:
            raise FinsheafError("%r is not an element" % (a,)) from None

    def __contains__(self, a):
        return a in self._index

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


EMPTY = FinSet(())
SINGLETON = FinSet(("*",))


@dataclass(frozen=True)
class FinSetMap:
    """A total function between finite sets, stored as an explicit table."""

    dom: FinSet
    cod: FinSet
    table: dict

    def __post_init__(self):
        object.__setattr__(self, "table", dict(self.table))
        for a in self.dom:
            if a not in self.table:
                raise FinsheafError("map not total: %r has no value" % (a,))
            if self.table[a] not in self.cod:
                raise FinsheafError("value %r outside codomain" % (self.table[a],))
        for a in self.table:
            if a not in self.dom:
                raise FinsheafError("table key %r outside domain" % (a,))

    def __call__(self, a):
        return self.table[a]

    def compose(self, other):
        """self after other."""
        if other.cod != self.dom:
            raise ShapeMismatch("maps not composable")
        return FinSetMap(other.dom, self.cod, {a: self.table[other.table[a]] for a in other.dom})

    def image(self):
        hit = {self.table[a] for a in self.dom}
        return tuple(b for b in self.cod if b in hit)

    def is_injective(self):
        seen = set()
        for a in self.dom:
            b = self.table[a]
            if b in seen:
                return False
            seen.add(b)
        return True

    def is_surjective(self):
        return len({self.table[a] for a in self.dom}) == len(self.cod)

    def is_bijective(self):
        return self.is_injective() and self.is_surjective()

    @staticmethod
    def identity(s):
        return FinSetMap(s, s, {a: a for a in s})


@dataclass(frozen=True)
class Subobject:
    """A carrier set with an injective inclusion into a fixed ambient set."""

    ambient: FinSet
    carrier: FinSet
    inclusion: FinSetMap

    def __post_init__(self):
        if self.inclusion.dom != self.carrier or self.inclusion.cod != self.ambient:
            raise FinsheafError("inclusion endpoints do not match carrier/ambient")
        if not self.inclusion.is_injective():
            raise FinsheafError("inclusion is not injective")

    def atoms(self):
        return frozenset(self.inclusion.table[a] for a in self.carrier)

    @staticmethod
    def from_atoms(ambient, atoms):
        """Canonical subobject: carrier keeps ambient order, inclusion is identity on atoms."""
        atoms = set(atoms)
        for a in atoms:
            if a not in ambient:
                raise AmbientMismatch("%r not in ambient set" % (a,))
        carrier = FinSet(tuple(a for a in ambient if a in atoms))
        return Subobject(ambient, carrier, FinSetMap(carrier, ambient, {a: a for a in carrier}))


def product(sets):
    """Cartesian product with projections; the empty product is a one-element set."""
    sets = list(sets)
    elements = tuple(iproduct(*[s.elements for s in sets]))
    prod = FinSet(elements)
    projections = [
        FinSetMap(prod, s, {t: t[i] for t in elements}) for i, s in enumerate(sets)
    ]
    return prod, projections


def coproduct(sets):
    """Tagged disjoint union with embeddings; elements are (source index, atom) pairs."""
    sets = list(sets)
    elements = tuple((i, a) for i, s in enumerate(sets) for a in s)
    cop = FinSet(elements)
    embeddings = [
        FinSetMap(s, cop, {a: (i, a) for a in s}) for i, s in enumerate(sets)
    ]
    return cop, embeddings


def equalizer(f, g):
    """Subobject of dom(f) where f and g agree."""
    if f.dom != g.dom or f.cod != g.cod:
        raise NotParallel("equalizer needs a parallel pair")
    return Subobject.from_atoms(f.dom, [a for a in f.dom if f(a) == g(a)])


class _UnionFind:
    """Index-based union-find; the root is always the least index, so class
    representatives follow the ambient element order."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri


def coequalizer(f, g):
    """Quotient of cod(f) by the equivalence generated by f(x) ~ g(x).

    Classes are named by their least element in codomain order; returns the
    quotient set and the projection map.
    """
    if f.dom != g.dom or f.cod != g.cod:
        raise NotParallel("coequalizer needs a parallel pair")
    cod = f.cod
    uf = _UnionFind(len(cod))
    for a in f.dom:
        uf.union(cod.index(f(a)), cod.index(g(a)))
    reps = [cod.elements[uf.find(i)] for i in range(len(cod))]
    quotient = FinSet(tuple(dict.fromkeys(reps)))
    projection = FinSetMap(cod, quotient, {a: reps[cod.index(a)] for a in cod})
    return quotient, projection


def pullback(f, g):
    """{(x, y) : f(x) = g(y)} with its two projections."""
    if f.cod != g.cod:
        raise ShapeMismatch("pullback needs a common codomain")
    elements = tuple((x, y) for x in f.dom for y in g.dom if f(x) == g(y))
    vertex = FinSet(elements)
    p1 = FinSetMap(vertex, f.dom, {e: e[0] for e in elements})
    p2 = FinSetMap(vertex, g.dom, {e: e[1] for e in elements})
    return vertex, p1, p2


def pushout(f, g):
    """Pushout of f: C -> A, g: C -> B via coproduct followed by coequalizer."""
    if f.dom != g.dom:
        raise ShapeMismatch("pushout needs a common domain")
    cop, (ia, ib) = coproduct([f.cod, g.cod])
    q, proj = coequalizer(ia.compose(f), ib.compose(g))
    return q, proj.compose(ia), proj.compose(ib)


@dataclass(frozen=True)
class MultiWedge:
    """The paired-limit shape: vertex sets B_a, pair sets A_ab (a < b in index
    order, with A_aa = B_a implicit) and maps B_a -> A_ab for every ordered
    pair.  `maps[(a, b)]` sends B_a into the unordered pair set of {a, b}."""

    indices: tuple
    vertices: dict
    edges: dict
    maps: dict

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        for (a, b), e in self.edges.items():
            if (min(a, b), max(a, b)) != (a, b):
                raise ShapeMismatch("edge keys must be sorted pairs")
        for (a, b), m in self.maps.items():
            key = (min(a, b), max(a, b))
            if key not in self.edges:
                raise ShapeMismatch("map for missing edge %r" % ((a, b),))
            if m.dom != self.vertices[a] or m.cod != self.edges[key]:
                raise ShapeMismatch("map endpoints wrong for %r" % ((a, b),))

    def pairs(self):
        idx = self.indices
        for i in range(len(idx)):
            for j in range(i + 1, len(idx)):
                yield idx[i], idx[j]


def paired_limit(wedge):
    """Compatible families of the multi-wedge: tuples (s_a) with the two maps
    into every pair set agreeing.  Enumerated by backtracking with pairwise
    pruning so large vertex sets stay tractable.  Returns the limit set (tuples
    aligned with wedge.indices) and the projection legs."""
    idx = list(wedge.indices)
    if not idx:
        vertex = FinSet(((),))
        return vertex, {}
    # buckets[(a, b)][value] = atoms of B_b whose map into the pair set hits value
    buckets = {}
    for a, b in wedge.pairs():
        for u, v in ((a, b), (b, a)):
            bucket = {}
            m = wedge.maps[(v, u)]
            for atom in wedge.vertices[v]:
                bucket.setdefault(m(atom), []).append(atom)
            buckets[(u, v)] = bucket
    families = []

    def extend(k, partial):
        if k == len(idx):
            families.append(tuple(partial))
            return
        b = idx[k]
        candidates = list(wedge.vertices[b])
        for i in range(k):
            a = idx[i]
            want = wedge.maps[(a, b)](partial[i])
            allowed = set(buckets[(a, b)].get(want, ()))
            candidates = [c for c in candidates if c in allowed]
            if not candidates:
                return
        for c in candidates:
            partial.append(c)
            extend(k + 1, partial)
            partial.pop()

    extend(0, [])
    vertex = FinSet(tuple(families))
    legs = {
        a: FinSetMap(vertex, wedge.vertices[a], {t: t[i] for t in families})
        for i, a in enumerate(idx)
    }
    return vertex, legs


@dataclass(frozen=True)
class MultiCowedge:
    """The paired-pushout shape: pair sets A_ab with maps A_ab -> B_a, A_ab -> B_b.
    `maps[(a, b)]` sends the unordered pair set of {a, b} into B_a."""

    indices: tuple
    vertices: dict
    edges: dict
    maps: dict

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        for (a, b), m in self.maps.items():
            key = (min(a, b), max(a, b))
            if key not in self.edges:
                raise ShapeMismatch("map for missing edge %r" % ((a, b),))
            if m.dom != self.edges[key] or m.cod != self.vertices[a]:
                raise ShapeMismatch("map endpoints wrong for %r" % ((a, b),))

    def pairs(self):
        idx = self.indices
        for i in range(len(idx)):
            for j in range(i + 1, len(idx)):
                yield idx[i], idx[j]


def paired_pushout(cowedge):
    """Tagged disjoint union of the B_a glued along the images of every pair set.
    Returns the colimit set and the embedding legs."""
    idx = list(cowedge.indices)
    sets = [cowedge.vertices[a] for a in idx]
    cop, embs = coproduct(sets)
    uf = _UnionFind(len(cop))
    pos = {a: i for i, a in enumerate(idx)}
    for a, b in cowedge.pairs():
        edge = cowedge.edges[(min(a, b), max(a, b))]
        ma, mb = cowedge.maps[(a, b)], cowedge.maps[(b, a)]
        for c in edge:
            uf.union(cop.index((pos[a], ma(c))), cop.index((pos[b], mb(c))))
    reps = [cop.elements[uf.find(i)] for i in range(len(cop))]
    vertex = FinSet(tuple(dict.fromkeys(reps)))
    proj = FinSetMap(cop, vertex, {e: reps[cop.index(e)] for e in cop})
    legs = {a: proj.compose(embs[pos[a]]) for a in idx}
    return vertex, legs


def sub_union(subs):
    subs = list(subs)
    ambient = _common_ambient(subs)
    atoms = set()
    for s in subs:
        atoms |= s.atoms()
    return Subobject.from_atoms(ambient, atoms)


def sub_intersection(subs):
    subs = list(subs)
    ambient = _common_ambient(subs)
    atoms = set(ambient.elements)
    for s in subs:
        atoms &= s.atoms()
    return Subobject.from_atoms(ambient, atoms)


def sub_difference(a, b):
    ambient = _common_ambient([a, b])
    return Subobject.from_atoms(ambient, a.atoms() - b.atoms())


def _common_ambient(subs):
    if not subs:
        raise AmbientMismatch("need at least one subobject")
    ambient = subs[0].ambient
    for s in subs[1:]:
        if s.ambient != ambient:
            raise AmbientMismatch("subobjects live in different ambient sets")
    return ambient


def image(f):
    """Image subobject of cod(f) with the factorization f = rho . pi."""
    carrier_atoms = f.image()
    sub = Subobject.from_atoms(f.cod, carrier_atoms)
    pi = FinSetMap(f.dom, sub.carrier, {a: f(a) for a in f.dom})
    return sub, pi, sub.inclusion


def submorphism(src, dst):
    """The unique submorphism src -> dst over a shared ambient, or None."""
    _common_ambient([src, dst])
    if not src.atoms() <= dst.atoms():
        return None
    back = {dst.inclusion(a): a for a in dst.carrier}
    return FinSetMap(src.carrier, dst.carrier, {a: back[src.inclusion(a)] for a in src.carrier})


# ---------------------------------------------------------------------------
# Universal-property verifiers.  These enumerate candidates exhaustively and
# are meant for tests and on-demand checks, not hot paths.
# ---------------------------------------------------------------------------


def count_mediating_into_limit(cone_legs, limit_vertex, limit_legs):
    """Number of maps h: K -> L with limit_legs[a] . h == cone_legs[a] for all a.

    K is read off the cone legs; the count is a product of per-element candidate
    counts, so exactly-one means a unique mediating map exists.
    """
    keys = list(limit_legs)
    if set(cone_legs) != set(keys):
        raise ShapeMismatch("cone and limit have different leg index sets")
    if not keys:
        raise ShapeMismatch("cannot infer vertex from an empty leg family")
    kset = cone_legs[keys[0]].dom
    total = 1
    for k in kset:
        n = sum(
            1
            for t in limit_vertex
            if all(limit_legs[a](t) == cone_legs[a](k) for a in keys)
        )
        total *= n
        if total == 0:
            return 0
    return total


def count_mediating_from_colimit(cocone_legs, colimit_vertex, colimit_legs):
    """Number of maps h: C -> K with h . colimit_legs[a] == cocone_legs[a] for all a."""
    keys = list(colimit_legs)
    if set(cocone_legs) != set(keys):
        raise ShapeMismatch("cocone and colimit have different leg index sets")
    forced = {}
    for a in keys:
        leg, want = colimit_legs[a], cocone_legs[a]
        for x in leg.dom:
            c = leg(x)
            v = want(x)
            if c in forced and forced[c] != v:
                return 0
            forced[c] = v
    uncovered = [c for c in colimit_vertex if c not in forced]
    if uncovered:
        if not keys:
            raise ShapeMismatch("cannot infer target from an empty leg family")
        kset = cocone_legs[keys[0]].cod
        return len(kset) ** len(uncovered)
    return 1


def _all_subobjects(ambient):
    n = len(ambient)
    for mask in range(1 << n):
        yield Subobject.from_atoms(
            ambient, [ambient.elements[i] for i in range(n) if mask >> i & 1]
        )


def verify_subobject_union(parts, candidate):
    """Exhaustive check that candidate is the smallest subobject admitting a
    submorphism from every part."""
    for p in parts:
        if submorphism(p, candidate) is None:
            return False
    for other in _all_subobjects(candidate.ambient):
        if all(submorphism(p, other) is not None for p in parts):
            if submorphism(candidate, other) is None:
                return False
    return True


def verify_subobject_intersection(parts, candidate):
    """Dual check: candidate is the biggest subobject mapping into every part."""
    for p in parts:
        if submorphism(candidate, p) is None:
            return False
    for other in _all_subobjects(candidate.ambient):
        if all(submorphism(other, p) is not None for p in parts):
            if submorphism(other, candidate) is None:
                return False
    return True


def verify_subobject_difference(a, b, candidate):
    """Candidate is the smallest subobject whose union with b covers a union b."""
    target = a.atoms() | b.atoms()
    if candidate.atoms() | b.atoms() != target:
        return False
    for other in _all_subobjects(candidate.ambient):
        if other.atoms() | b.atoms() == target:
            if submorphism(candidate, other) is None:
                return False
    return True


def verify_image(f, candidate):
    """Candidate factors f and is the smallest subobject of cod(f) doing so."""
    back = {candidate.inclusion(a): a for a in candidate.carrier}
    for x in f.dom:
        if f(x) not in back:
            return False
    for other in _all_subobjects(f.cod):
        if all(f(x) in other.atoms() for x in f.dom):
            if submorphism(candidate, other) is None:
                return False
    return True
