"""Set-valued presheaves and copresheaves on topology algebras.

The gluing condition, stalks/costalks, section and fiber spaces, apexness, and
the sheafification pipeline: coverings, multi-wedge limits, mediating maps into
the product of stalks, and unions of images inside the section space.

Covering enumeration: a covering of x is ANY subset with join x, but a covering
member lying below another never changes the compatible-family set (the extra
coordinate is forced by restriction from the larger member, and its pairwise
constraints follow from that member's), so gluing holds for a covering iff it
holds for the antichain of its maximal members.  All default checks therefore
run over antichain coverings only; `exhaustive=True` re-runs the full subset
scan and is cross-checked against the reduction in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

from .errors import FinsheafError
from .fincat import SetFunctor, poset_category
from .finset import FinSet, FinSetMap, MultiCowedge, MultiWedge, paired_limit, paired_pushout
from .limits import colimit_finset, limit_families
from .topalg import (
    AlgebraHom,
    Particle,
    TopologyAlgebra,
    particles,
    set_representation,
    subalgebra,
)


class NotAParticle(FinsheafError):
    pass


class Incompatible(FinsheafError):
    pass


class IncompatiblePartition(FinsheafError):
    pass


def _check_functorial(alg, sets, maps, contravariant):
    """Identity and composition coherence of a table of maps over the order.

    Composition is verified on (cover, tail) triples: x covered by y, then any
    z above y; the general triple follows by induction along maximal chains.
    """
    for x in alg.elements:
        m = maps.get((x, x))
        if m is None or m.table != {a: a for a in sets[x]}:
            raise FinsheafError("identity map wrong at %r" % (x,))
    for x, y in alg.comparable_pairs():
        m = maps.get((x, y))
        if m is None:
            raise FinsheafError("map missing for %r <= %r" % (x, y))
        if contravariant:
            if m.dom != sets[y] or m.cod != sets[x]:
                raise FinsheafError("map endpoints wrong for %r <= %r" % (x, y))
        else:
            if m.dom != sets[x] or m.cod != sets[y]:
                raise FinsheafError("map endpoints wrong for %r <= %r" % (x, y))
    covers = []
    for x, y in alg.comparable_pairs():
        if x == y:
            continue
        between = [z for z in alg.elements if alg.leq(x, z) and alg.leq(z, y) and z not in (x, y)]
        if not between:
            covers.append((x, y))
    for x, y in covers:
        for z in alg.above(y):
            if contravariant:
                lhs = maps[(x, y)].compose(maps[(y, z)])
            else:
                lhs = maps[(y, z)].compose(maps[(x, y)])
            if lhs.table != maps[(x, z)].table:
                raise FinsheafError(
                    "composition fails along %r <= %r <= %r" % (x, y, z)
                )


@dataclass(frozen=True)
class Presheaf:
    """Contravariant set assignment: maps[(x, y)] is the restriction
    F(y) -> F(x) for x <= y."""

    algebra: TopologyAlgebra
    sets: dict
    maps: dict

    def __post_init__(self):
        maps = dict(self.maps)
        for x in self.algebra.elements:
            maps.setdefault((x, x), FinSetMap.identity(self.sets[x]))
        object.__setattr__(self, "maps", maps)
        _check_functorial(self.algebra, self.sets, maps, contravariant=True)

    def set_at(self, x):
        return self.sets[x]

    def res(self, x, y):
        """Restriction F(y) -> F(x), x <= y."""
        return self.maps[(x, y)]


@dataclass(frozen=True)
class Copresheaf:
    """Covariant set assignment: maps[(x, y)] is the extension F(x) -> F(y)."""

    algebra: TopologyAlgebra
    sets: dict
    maps: dict

    def __post_init__(self):
        maps = dict(self.maps)
        for x in self.algebra.elements:
            maps.setdefault((x, x), FinSetMap.identity(self.sets[x]))
        object.__setattr__(self, "maps", maps)
        _check_functorial(self.algebra, self.sets, maps, contravariant=False)

    def set_at(self, x):
        return self.sets[x]

    def ext(self, x, y):
        """Extension F(x) -> F(y), x <= y."""
        return self.maps[(x, y)]


@dataclass(frozen=True)
class PresheafNat:
    F: Presheaf
    G: Presheaf
    components: dict

    def __post_init__(self):
        alg = self.F.algebra
        for x in alg.elements:
            c = self.components.get(x)
            if c is None or c.dom != self.F.sets[x] or c.cod != self.G.sets[x]:
                raise FinsheafError("bad component at %r" % (x,))
        for x, y in alg.comparable_pairs():
            lhs = self.G.res(x, y).compose(self.components[y])
            rhs = self.components[x].compose(self.F.res(x, y))
            if lhs.table != rhs.table:
                raise FinsheafError("naturality fails at %r <= %r" % (x, y))

    def at(self, x):
        return self.components[x]


@dataclass(frozen=True)
class CopresheafNat:
    F: Copresheaf
    G: Copresheaf
    components: dict

    def __post_init__(self):
        alg = self.F.algebra
        for x in alg.elements:
            c = self.components.get(x)
            if c is None or c.dom != self.F.sets[x] or c.cod != self.G.sets[x]:
                raise FinsheafError("bad component at %r" % (x,))
        for x, y in alg.comparable_pairs():
            lhs = self.components[y].compose(self.F.ext(x, y))
            rhs = self.G.ext(x, y).compose(self.components[x])
            if lhs.table != rhs.table:
                raise FinsheafError("naturality fails at %r <= %r" % (x, y))

    def at(self, x):
        return self.components[x]


def identity_presheaf_nat(F):
    return PresheafNat(F, F, {x: FinSetMap.identity(F.sets[x]) for x in F.algebra.elements})


def compose_presheaf_nats(beta, alpha):
    return PresheafNat(
        alpha.F,
        beta.G,
        {
            x: beta.components[x].compose(alpha.components[x])
            for x in alpha.F.algebra.elements
        },
    )


def presheaf_tables_equal(F, G):
    if F.algebra.elements != G.algebra.elements or F.algebra.leq_pairs != G.algebra.leq_pairs:
        return False
    if any(F.sets[x].elements != G.sets[x].elements for x in F.algebra.elements):
        return False
    return all(F.maps[k].table == G.maps[k].table for k in F.maps)


# --- coverings and the gluing condition -----------------------------------------------


def coverings_by_join(alg, exhaustive=False):
    """Masks grouped by join index.  Default: antichains only (see module
    docstring for why that is exact); exhaustive: every subset."""
    join_of = alg.join_of_mask_table()
    masks = range(1 << len(alg)) if exhaustive else alg.antichains()
    grouped = {}
    for mask in masks:
        grouped.setdefault(join_of[mask], []).append(mask)
    return grouped


@dataclass(frozen=True)
class GluingReport:
    ok: bool
    witness: tuple  # (element, covering members, reason) or ()


def _wedge_for(F, members, contravariant):
    vertices = {u: F.sets[u] for u in members}
    edges = {}
    maps = {}
    alg = F.algebra
    for i, u in enumerate(members):
        for v in members[i + 1:]:
            key = (min(u, v), max(u, v))
            m = alg.meet(u, v)
            edges[key] = F.sets[m]
            if contravariant:
                maps[(u, v)] = F.res(m, u)
                maps[(v, u)] = F.res(m, v)
            else:
                maps[(u, v)] = F.ext(m, u)
                maps[(v, u)] = F.ext(m, v)
    return vertices, edges, maps


def is_sheaf(F, exhaustive=False):
    """Value at bottom a singleton, and for every covering the restriction
    family realizes F(join) as the paired limit of the multi-wedge."""
    alg = F.algebra
    if len(F.sets[alg.bottom]) != 1:
        return GluingReport(False, (alg.bottom, (), "value at bottom is not a singleton"))
    grouped = coverings_by_join(alg, exhaustive=exhaustive)
    for join_idx in sorted(grouped):
        x = alg.elements[join_idx]
        for mask in grouped[join_idx]:
            members = alg.elements_of_mask(mask)
            if len(members) < 2 and not exhaustive:
                continue
            vertices, edges, maps = _wedge_for(F, members, contravariant=True)
            wedge = MultiWedge(members, vertices, edges, maps)
            vertex, legs = paired_limit(wedge)
            canonical = {
                s: tuple(F.res(u, x)(s) for u in members) for s in F.sets[x]
            }
            fam_set = set(vertex.elements)
            if any(v not in fam_set for v in canonical.values()):
                return GluingReport(False, (x, members, "restrictions not compatible"))
            if len(set(canonical.values())) != len(canonical):
                return GluingReport(False, (x, members, "sections not separated"))
            if len(canonical) != len(vertex):
                return GluingReport(False, (x, members, "compatible family does not glue"))
    return GluingReport(True, ())


def is_cosheaf(F, exhaustive=False):
    """Value at bottom empty, and for every covering the extension family
    realizes F(join) as the paired pushout of the multi-wedge."""
    alg = F.algebra
    if len(F.sets[alg.bottom]) != 0:
        return GluingReport(False, (alg.bottom, (), "value at bottom is not empty"))
    grouped = coverings_by_join(alg, exhaustive=exhaustive)
    for join_idx in sorted(grouped):
        x = alg.elements[join_idx]
        for mask in grouped[join_idx]:
            members = alg.elements_of_mask(mask)
            if len(members) < 2 and not exhaustive:
                continue
            vertices, edges, maps = _wedge_for(F, members, contravariant=False)
            cowedge = MultiCowedge(members, vertices, edges, maps)
            vertex, legs = paired_pushout(cowedge)
            # the mediating map out of the pushout must be a bijection onto F(x)
            value = {}
            ok = True
            for u in members:
                ext = F.ext(u, x)
                leg = legs[u]
                for a in F.sets[u]:
                    cls = leg(a)
                    v = ext(a)
                    if cls in value and value[cls] != v:
                        ok = False
                        break
                    value[cls] = v
                if not ok:
                    break
            if not ok:
                return GluingReport(False, (x, members, "extensions disagree on overlaps"))
            hit = list(value.values())
            if len(set(hit)) != len(hit):
                return GluingReport(False, (x, members, "pushout classes collide"))
            if set(hit) != set(F.sets[x].elements):
                return GluingReport(False, (x, members, "extensions do not cover"))
    return GluingReport(True, ())


# --- restriction and precomposition ----------------------------------------------------


def restrict(F, y):
    """Local (co)presheaf on the subalgebra below y."""
    sub = subalgebra(F.algebra, y)
    keep = set(sub.elements)
    sets = {x: F.sets[x] for x in sub.elements}
    maps = {k: v for k, v in F.maps.items() if k[0] in keep and k[1] in keep}
    cls = Presheaf if isinstance(F, Presheaf) else Copresheaf
    return cls(sub, sets, maps)


def precompose(F, f):
    """F . f on the source of the algebra hom f: Y -> X."""
    Y = f.src
    sets = {y: F.sets[f(y)] for y in Y.elements}
    maps = {}
    for y1, y2 in Y.comparable_pairs():
        if isinstance(F, Presheaf):
            maps[(y1, y2)] = F.res(f(y1), f(y2))
        else:
            maps[(y1, y2)] = F.ext(f(y1), f(y2))
    cls = Presheaf if isinstance(F, Presheaf) else Copresheaf
    return cls(Y, sets, maps)


# --- stalks ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Stalk:
    """Colimit of a presheaf over a particle: germs with the maps into them."""

    particle: Particle
    germs: FinSet
    germ_maps: dict  # x in particle -> FinSetMap F(x) -> germs


@dataclass(frozen=True)
class Costalk:
    """Limit of a copresheaf over a particle: compatible families with the
    projection maps out of them."""

    particle: Particle
    families: FinSet
    legs: dict  # x in particle -> FinSetMap families -> F(x)


def _particle_members_sorted(alg, p):
    return sorted(p.members, key=alg.index)


def _check_particle(alg, p):
    pts = particles(alg)
    if all(p.members != q.members for q in pts):
        raise NotAParticle(repr(sorted(p.members)))


def stalk(F, p):
    """Germ space at p: tagged disjoint union of the F(x), x in p, glued along
    every restriction between members.  Computed as a finite-set colimit, then
    relabeled g0, g1, ... in representative order."""
    alg = F.algebra
    _check_particle(alg, p)
    members = _particle_members_sorted(alg, p)
    # diagram over the reversed order: one arrow per pair y <= x sends F(x) to F(y)
    rel = [(x, y) for x in members for y in members if alg.leq(y, x)]
    shape = poset_category(members, rel)
    sets = {x: F.sets[x] for x in members}
    maps = {}
    for x, y in rel:
        maps["%s<=%s" % (x, y)] = F.res(y, x)
    diagram = SetFunctor(shape, sets, maps)
    cocone = colimit_finset(diagram)
    order = {e: i for i, e in enumerate(cocone.vertex)}
    names = {e: "g%d" % i for e, i in order.items()}
    germs = FinSet(tuple(names[e] for e in cocone.vertex))
    germ_maps = {
        x: FinSetMap(
            F.sets[x], germs, {a: names[cocone.legs[x](a)] for a in F.sets[x]}
        )
        for x in members
    }
    return Stalk(p, germs, germ_maps)


def costalk(F, p):
    """Compatible families of a copresheaf over p, with projections."""
    alg = F.algebra
    _check_particle(alg, p)
    members = _particle_members_sorted(alg, p)
    # topological order (fewest elements below first) keeps the search forced
    members.sort(key=lambda x: (bin(alg._down[alg.index(x)]).count("1"), alg.index(x)))
    rel = [(x, y) for x in members for y in members if alg.leq(x, y)]
    shape = poset_category(members, rel)
    sets = {x: F.sets[x] for x in members}
    maps = {}
    for x, y in rel:
        maps["%s<=%s" % (x, y)] = F.ext(x, y)
    diagram = SetFunctor(shape, sets, maps)
    cone = limit_families(diagram)
    return Costalk(p, cone.vertex, cone.legs)


# --- section and fiber spaces ------------------------------------------------------------


@dataclass(frozen=True)
class SectionFiber:
    rep: object  # SetRepresentation
    stalks: dict  # particle index -> Stalk (presheaf input) or Costalk
    sec: Presheaf
    fib: Copresheaf
    alpha_sec: object  # PresheafNat F -> sec, when F is a presheaf
    alpha_fib: object  # CopresheafNat fib -> F, when F is a copresheaf


def _stalk_sets(stalks, i):
    s = stalks[i]
    return s.germs if isinstance(s, Stalk) else s.families


def section_fiber_spaces(F):
    """Products (section space) and tagged sums (fiber space) of the stalks
    over T_x, with the canonical nat on the side the variance provides."""
    alg = F.algebra
    rep = set_representation(alg)
    is_pre = isinstance(F, Presheaf)
    stalks = {}
    for i, p in enumerate(rep.points):
        stalks[i] = stalk(F, p) if is_pre else costalk(F, p)
    t_sorted = {x: sorted(rep.table[x]) for x in alg.elements}

    sec_sets = {}
    for x in alg.elements:
        atoms = tuple(
            iproduct(*[_stalk_sets(stalks, i).elements for i in t_sorted[x]])
        )
        sec_sets[x] = FinSet(atoms)
    sec_maps = {}
    for x, y in alg.comparable_pairs():
        keep = [t_sorted[y].index(i) for i in t_sorted[x]]
        sec_maps[(x, y)] = FinSetMap(
            sec_sets[y], sec_sets[x],
            {t: tuple(t[k] for k in keep) for t in sec_sets[y]},
        )
    sec = Presheaf(alg, sec_sets, sec_maps)

    fib_sets = {
        x: FinSet(
            tuple(
                ("p%d" % i, a)
                for i in t_sorted[x]
                for a in _stalk_sets(stalks, i)
            )
        )
        for x in alg.elements
    }
    fib_maps = {}
    for x, y in alg.comparable_pairs():
        fib_maps[(x, y)] = FinSetMap(
            fib_sets[x], fib_sets[y], {e: e for e in fib_sets[x]}
        )
    fib = Copresheaf(alg, fib_sets, fib_maps)

    alpha_sec = None
    alpha_fib = None
    if is_pre:
        components = {}
        for x in alg.elements:
            components[x] = FinSetMap(
                F.sets[x], sec_sets[x],
                {
                    s: tuple(stalks[i].germ_maps[x](s) for i in t_sorted[x])
                    for s in F.sets[x]
                },
            )
        alpha_sec = PresheafNat(F, sec, components)
    else:
        components = {}
        for x in alg.elements:
            components[x] = FinSetMap(
                fib_sets[x], F.sets[x],
                {
                    ("p%d" % i, a): stalks[i].legs[x](a)
                    for i in t_sorted[x]
                    for a in _stalk_sets(stalks, i)
                },
            )
        alpha_fib = CopresheafNat(fib, F, components)
    return SectionFiber(rep, stalks, sec, fib, alpha_sec, alpha_fib)


# --- apexness ------------------------------------------------------------------------------


def apex_predicates(F):
    """preapex: every map between x and top is epic (presheaf) / monic
    (copresheaf).  apex: additionally no iso between two values commutes with
    the maps from/to the top, which for surjections means pairwise-distinct
    kernel partitions and for injections pairwise-distinct images."""
    alg = F.algebra
    top = alg.top
    if isinstance(F, Presheaf):
        rs = {x: F.res(x, top) for x in alg.elements}
        preapex = all(m.is_surjective() for m in rs.values())
        if not preapex:
            return {"preapex": False, "apex": False}
        kernels = {}
        for x, m in rs.items():
            groups = {}
            for s in m.dom:
                groups.setdefault(m(s), []).append(s)
            kernels[x] = frozenset(frozenset(g) for g in groups.values())
        values = list(kernels.values())
        apex = len(set(values)) == len(values)
        return {"preapex": True, "apex": apex}
    es = {x: F.ext(x, top) for x in alg.elements}
    preapex = all(m.is_injective() for m in es.values())
    if not preapex:
        return {"preapex": False, "apex": False}
    images = [frozenset(m.image()) for m in es.values()]
    apex = len(set(images)) == len(images)
    return {"preapex": True, "apex": apex}


def iso_over_top_exists(F, x, y):
    """Brute-force oracle for the apex condition: search all bijections
    F(x) -> F(y) commuting with the maps at the top."""
    from itertools import permutations

    alg = F.algebra
    a, b = F.sets[x], F.sets[y]
    if len(a) != len(b):
        return False
    for perm in permutations(b.elements):
        table = dict(zip(a.elements, perm))
        if isinstance(F, Presheaf):
            rx, ry = F.res(x, alg.top), F.res(y, alg.top)
            if all(table[rx(s)] == ry(s) for s in F.sets[alg.top]):
                return True
        else:
            ex, ey = F.ext(x, alg.top), F.ext(y, alg.top)
            if all(ey(table[s]) == ex(s) for s in a):
                return True
    return False


# --- gluing of local sheaves ----------------------------------------------------------------


def glue_local_sheaves(alg, family):
    """Glue compatible sheaves on subalgebras into one sheaf on the glued union.

    `family` is a list of (y, presheaf on y^<=).  Values inside the union are
    reused verbatim (so restriction recovers the inputs exactly); values at
    elements outside it are the compatible families over the covering
    {w ∧ y_a}, whose join is w because the algebra is distributive.
    """
    family = list(family)
    ys = [y for y, _ in family]
    sheaves = [s for _, s in family]
    for i, (y, s) in enumerate(family):
        if set(s.algebra.elements) != set(alg.below(y)):
            raise FinsheafError("sheaf %d does not live on the subalgebra below %r" % (i, y))
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            m = alg.meet(ys[i], ys[j])
            a = restrict(sheaves[i], m)
            b = restrict(sheaves[j], m)
            if not presheaf_tables_equal(a, b):
                raise Incompatible("sheaves %d and %d differ below %r" % (i, j, m))
    from .topalg import glued_union

    glued = glued_union(alg, ys)
    Z = glued.algebra
    owner = {}
    for w in Z.elements:
        for i, y in enumerate(ys):
            if alg.leq(w, y):
                owner[w] = i
                break

    members_of = {}
    pos_of = {}
    for w in Z.elements:
        if w in owner:
            continue
        members = []
        pos = {}
        for i, y in enumerate(ys):
            m = alg.meet(w, y)
            if m not in members:
                members.append(m)
            pos[i] = members.index(m)
        members_of[w] = tuple(members)
        pos_of[w] = pos

    sets = {}
    for w in Z.elements:
        if w in owner:
            sets[w] = sheaves[owner[w]].sets[w]
        else:
            members = members_of[w]
            vertices = {u: sheaves[_owner_of(alg, ys, u)].sets[u] for u in members}
            edges, maps = {}, {}
            for a_i, u in enumerate(members):
                for v in members[a_i + 1:]:
                    key = (min(u, v), max(u, v))
                    m = alg.meet(u, v)
                    own = _owner_of(alg, ys, m)
                    edges[key] = sheaves[own].sets[m]
                    maps[(u, v)] = sheaves[_owner_of(alg, ys, u)].res(m, u)
                    maps[(v, u)] = sheaves[_owner_of(alg, ys, v)].res(m, v)
            vertex, _ = paired_limit(MultiWedge(members, vertices, edges, maps))
            sets[w] = vertex

    def value_res(w1, w, t):
        """Restriction of the glued value t at w down to w1 <= w."""
        if w in owner:
            # w's owner covers w1 too; tables below the meet agree by compatibility
            return sheaves[owner[w]].res(w1, w)(t)
        if w1 in owner:
            i = owner[w1]
            return sheaves[i].res(w1, alg.meet(w, ys[i]))(t[pos_of[w][i]])
        out = []
        for k, u1 in enumerate(members_of[w1]):
            i = min(j for j in pos_of[w1] if pos_of[w1][j] == k)
            # u1 = w1 ∧ y_i <= w ∧ y_i, both inside sheaf i's subalgebra
            out.append(sheaves[i].res(u1, alg.meet(w, ys[i]))(t[pos_of[w][i]]))
        return tuple(out)

    maps = {}
    for w1, w in Z.comparable_pairs():
        maps[(w1, w)] = FinSetMap(
            sets[w], sets[w1], {t: value_res(w1, w, t) for t in sets[w]}
        )
    glued_sheaf = Presheaf(Z, sets, maps)
    for i, (y, s) in enumerate(family):
        if not presheaf_tables_equal(restrict(glued_sheaf, y), s):
            raise FinsheafError("glued sheaf does not restrict to input %d" % i)
    return glued_sheaf


def _owner_of(alg, ys, u):
    for i, y in enumerate(ys):
        if alg.leq(u, y):
            return i
    raise AssertionError("element %r not inside the union" % (u,))


# --- sheafification ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Sheafification:
    presheaf: Presheaf
    sheaf: Presheaf
    theta: PresheafNat
    sections: SectionFiber


def _germ_tuple(sfr, t_sorted_x, members, member_t, family):
    """Image of a covering family inside the product of stalks over T_x.

    For each particle of T_x, every covering member containing it must yield
    the same germ; disagreement would contradict family compatibility.
    """
    out = []
    for i in t_sorted_x:
        germ = None
        for k, u in enumerate(members):
            if i in member_t[u]:
                g = sfr.stalks[i].germ_maps[u](family[k])
                if germ is None:
                    germ = g
                elif germ != g:
                    raise FinsheafError("incoherent germs inside a compatible family")
        if germ is None:
            raise AssertionError("T_x not covered by the member T sets")
        out.append(germ)
    return tuple(out)


def _germ_compatible_families(F, sfr, members):
    """Families (s_u) over the covering members whose germs agree on every
    pairwise meet.

    Strict compatibility through F(u ∧ v) is too strong: sections that differ
    only by junk killed in every stalk (below-the-meet data a separated presheaf
    would not carry) must still assemble, or the union of images fails its own
    gluing.  Agreement of germ signatures on T_{u ∧ v} is the exact condition
    under which a family defines one tuple of stalks, and strictly compatible
    families always satisfy it.
    """
    alg = F.algebra
    rep = sfr.rep
    k = len(members)
    sig = {}
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            meet = alg.meet(members[a], members[b])
            t_meet = sorted(rep.table[meet])
            table = {}
            for s in F.sets[members[a]]:
                table[s] = tuple(
                    sfr.stalks[i].germ_maps[members[a]](s) for i in t_meet
                )
            sig[(a, b)] = table
    out = []

    def extend(j, partial):
        if j == k:
            out.append(tuple(partial))
            return
        for s in F.sets[members[j]]:
            ok = True
            for a in range(j):
                if sig[(a, j)][partial[a]] != sig[(j, a)][s]:
                    ok = False
                    break
            if ok:
                partial.append(s)
                extend(j + 1, partial)
                partial.pop()

    extend(0, [])
    return out


def sheafify(F):
    """The universal sheaf under F.

    For every element x and every covering of x, the families over the covering
    that agree germwise on pairwise meets are pushed into the product of stalks
    over T_x; the sheaf value at x is the union of those images, the
    restriction maps are coordinate projections, and the unit sends a section
    to its germ tuple.  The unit is asserted equal across all coverings, and
    the output is re-checked to be a sheaf.
    """
    alg = F.algebra
    sfr = section_fiber_spaces(F)
    rep = sfr.rep
    t_sorted = {x: sorted(rep.table[x]) for x in alg.elements}
    member_t = {x: rep.table[x] for x in alg.elements}
    grouped = coverings_by_join(alg)
    germ_order = {
        i: {g: k for k, g in enumerate(_stalk_sets(sfr.stalks, i).elements)}
        for i in sfr.stalks
    }

    bar_sets = {}
    for x in alg.elements:
        xi = alg.index(x)
        collected = set()
        theta_image = {
            s: sfr.alpha_sec.components[x](s) for s in F.sets[x]
        }
        for mask in grouped.get(xi, ()):
            members = alg.elements_of_mask(mask)
            for family in _germ_compatible_families(F, sfr, members):
                collected.add(_germ_tuple(sfr, t_sorted[x], members, member_t, family))
            # the unit must be independent of the covering
            for s in F.sets[x]:
                fam = tuple(F.res(u, x)(s) for u in members)
                if _germ_tuple(sfr, t_sorted[x], members, member_t, fam) != theta_image[s]:
                    raise FinsheafError("unit depends on the covering at %r" % (x,))
        key = lambda t, x=x: tuple(germ_order[i][g] for i, g in zip(t_sorted[x], t))
        bar_sets[x] = FinSet(tuple(sorted(collected, key=key)))

    bar_maps = {}
    for x, y in alg.comparable_pairs():
        keep = [t_sorted[y].index(i) for i in t_sorted[x]]
        table = {}
        for t in bar_sets[y]:
            projected = tuple(t[k] for k in keep)
            if projected not in bar_sets[x]:
                raise FinsheafError("projection leaves the sheaf value at %r" % (x,))
            table[t] = projected
        bar_maps[(x, y)] = FinSetMap(bar_sets[y], bar_sets[x], table)
    bar = Presheaf(alg, bar_sets, bar_maps)
    theta = PresheafNat(
        F, bar,
        {
            x: FinSetMap(
                F.sets[x], bar_sets[x],
                {s: sfr.alpha_sec.components[x](s) for s in F.sets[x]},
            )
            for x in alg.elements
        },
    )
    report = is_sheaf(bar)
    if not report.ok:
        raise FinsheafError("sheafification failed to produce a sheaf: %r" % (report.witness,))
    return Sheafification(F, bar, theta, sfr)


def factor_through_sheafification(shf, G, alpha):
    """The unique nat out of the sheafification with (result . unit) == alpha.

    Every sheaf value arises as the germ tuple of some compatible family; the
    image of that family under alpha is again compatible, so it glues uniquely
    in G, and that glue is the value of the factorization.
    """
    F = shf.presheaf
    alg = F.algebra
    sfr = shf.sections
    rep = sfr.rep
    t_sorted = {x: sorted(rep.table[x]) for x in alg.elements}
    member_t = {x: rep.table[x] for x in alg.elements}
    grouped = coverings_by_join(alg)
    components = {}
    for x in alg.elements:
        xi = alg.index(x)
        table = {}
        for mask in grouped.get(xi, ()):
            members = alg.elements_of_mask(mask)
            for family in _germ_compatible_families(F, sfr, members):
                t = _germ_tuple(sfr, t_sorted[x], members, member_t, family)
                glued = [
                    g
                    for g in G.sets[x]
                    if all(
                        G.res(u, x)(g) == alpha.components[u](family[k])
                        for k, u in enumerate(members)
                    )
                ]
                if len(glued) != 1:
                    raise FinsheafError(
                        "target does not glue uniquely over %r" % (members,)
                    )
                if t in table and table[t] != glued[0]:
                    raise FinsheafError("factorization ill-defined at %r" % (x,))
                table[t] = glued[0]
        if set(table) != set(shf.sheaf.sets[x].elements):
            raise FinsheafError("factorization missed sheaf values at %r" % (x,))
        components[x] = FinSetMap(shf.sheaf.sets[x], G.sets[x], table)
    result = PresheafNat(shf.sheaf, G, components)
    for x in alg.elements:
        lhs = components[x].compose(shf.theta.components[x])
        if lhs.table != alpha.components[x].table:
            raise FinsheafError("factorization does not extend alpha at %r" % (x,))
    return result


def sheafify_nat(alpha, shf_F=None, shf_G=None):
    """Functorial action on nats: factor (unit_G . alpha) through the unit of F."""
    if shf_F is None:
        shf_F = sheafify(alpha.F)
    if shf_G is None:
        shf_G = sheafify(alpha.G)
    beta = compose_presheaf_nats(shf_G.theta, alpha)
    return factor_through_sheafification(shf_F, shf_G.sheaf, beta)


def enumerate_presheaf_nats(F, G):
    """All nats F -> G by backtracking over components; test-scale."""
    alg = F.algebra
    order = sorted(alg.elements, key=lambda x: -len(alg.below(x)))
    out = []

    def extend(k, chosen):
        if k == len(order):
            out.append(
                PresheafNat(
                    F, G, {x: FinSetMap(F.sets[x], G.sets[x], dict(t)) for x, t in chosen.items()}
                )
            )
            return
        x = order[k]
        dom = F.sets[x].elements
        for values in iproduct(G.sets[x].elements, repeat=len(dom)):
            table = dict(zip(dom, values))
            ok = True
            for y in order[:k]:
                if alg.leq(x, y):
                    for s in F.sets[y]:
                        if G.res(x, y)(chosen[y][s]) != table[F.res(x, y)(s)]:
                            ok = False
                            break
                elif alg.leq(y, x):
                    for s in dom:
                        if G.res(y, x)(table[s]) != chosen[y][F.res(y, x)(s)]:
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                chosen[x] = table
                extend(k + 1, chosen)
                del chosen[x]

    if any(len(F.sets[x]) > 0 and len(G.sets[x]) == 0 for x in alg.elements):
        return []
    extend(0, {})
    return out


# --- quotient sheaves -----------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientSheafResult:
    quotient: Presheaf
    projection: PresheafNat
    sheafification: Sheafification


def quotient_presheaf(F, partitions):
    """Quotient each value set by a partition compatible with restrictions."""
    alg = F.algebra
    rep_of = {}
    for x in alg.elements:
        classes = [frozenset(c) for c in partitions.get(x, [])]
        seen = set()
        for c in classes:
            for a in c:
                if a not in F.sets[x] or a in seen:
                    raise IncompatiblePartition("bad partition at %r" % (x,))
                seen.add(a)
        if seen != set(F.sets[x].elements):
            raise IncompatiblePartition("partition at %r does not cover" % (x,))
        for c in classes:
            r = min(c, key=F.sets[x].index)
            for a in c:
                rep_of[(x, a)] = r
    for x, y in alg.comparable_pairs():
        if x == y:
            continue
        res = F.res(x, y)
        for a in F.sets[y]:
            for b in F.sets[y]:
                if rep_of[(y, a)] == rep_of[(y, b)]:
                    if rep_of[(x, res(a))] != rep_of[(x, res(b))]:
                        raise IncompatiblePartition(
                            "restriction does not descend at %r <= %r on (%r, %r)"
                            % (x, y, a, b)
                        )
    sets = {}
    for x in alg.elements:
        reps = [a for a in F.sets[x] if rep_of[(x, a)] == a]
        sets[x] = FinSet(tuple(reps))
    maps = {}
    for x, y in alg.comparable_pairs():
        res = F.res(x, y)
        maps[(x, y)] = FinSetMap(
            sets[y], sets[x], {a: rep_of[(x, res(a))] for a in sets[y]}
        )
    q = Presheaf(alg, sets, maps)
    projection = PresheafNat(
        F, q,
        {
            x: FinSetMap(F.sets[x], sets[x], {a: rep_of[(x, a)] for a in F.sets[x]})
            for x in alg.elements
        },
    )
    return q, projection


def quotient_sheaf(F, partitions):
    q, projection = quotient_presheaf(F, partitions)
    return QuotientSheafResult(q, projection, sheafify(q))


# --- hom sheaves ------------------------------------------------------------------------------


def hom_sheaf(F, A, verify=True):
    """x |-> all maps F(x) -> A for a cosheaf F; restriction by precomposition
    with the extensions.  Maps are stored as value tuples over F(x) in element
    order."""
    if not isinstance(F, Copresheaf):
        raise FinsheafError("hom sheaf needs a cosheaf")
    alg = F.algebra
    sets = {}
    for x in alg.elements:
        n = len(F.sets[x])
        sets[x] = FinSet(tuple(iproduct(A.elements, repeat=n)))
    maps = {}
    for x, y in alg.comparable_pairs():
        ext = F.ext(x, y)
        idx = [F.sets[y].index(ext(e)) for e in F.sets[x]]
        maps[(x, y)] = FinSetMap(
            sets[y], sets[x], {t: tuple(t[i] for i in idx) for t in sets[y]}
        )
    H = Presheaf(alg, sets, maps)
    if verify:
        report = is_sheaf(H)
        if not report.ok:
            raise FinsheafError("hom construction failed the sheaf check: %r" % (report.witness,))
    return H


# --- the set-representation cosheaf ------------------------------------------------------------


def set_representation_copresheaf(alg):
    """T as a copresheaf: value at x is the set of points of x, extensions are
    the inclusions."""
    rep = set_representation(alg)
    sets = {
        x: FinSet(tuple("p%d" % i for i in sorted(rep.table[x])))
        for x in alg.elements
    }
    maps = {}
    for x, y in alg.comparable_pairs():
        maps[(x, y)] = FinSetMap(sets[x], sets[y], {a: a for a in sets[x]})
    return rep, Copresheaf(alg, sets, maps)


def t_nat_of_hom(f):
    """T^f: (T^X . f) -> T^Y over Y, sending a point through the preimage map."""
    from .topalg import patl_of_hom

    Y, X = f.src, f.dst
    pm = patl_of_hom(f)
    rep_x, tx = set_representation_copresheaf(X)
    rep_y, ty = set_representation_copresheaf(Y)
    src = precompose(tx, f)
    components = {}
    for y in Y.elements:
        components[y] = FinSetMap(
            src.sets[y], ty.sets[y],
            {"p%d" % i: "p%d" % pm.point_map[i] for i in sorted(rep_x.table[f(y)])},
        )
    return CopresheafNat(src, ty, components)
