"""Limits and colimits of finite diagrams, two independent ways.

Abstract route: enumerate the cone category inside a finite target category and
pick terminal objects.  Concrete route: the product-then-equalizer construction
in finite sets, cross-checkable against a plain compatible-family enumeration.
Both pictures of limits (construction and characterization by mediating
morphisms plus jointly-monic legs) are exposed as verifiers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

from .errors import FinsheafError
from .fincat import (
    FiniteCategory,
    FunctorTable,
    SetFunctor,
    functors_equal,
    identity_functor,
    mor_category,
    validate_category,
)
from .finset import FinSet, FinSetMap, coproduct, equalizer, product, _UnionFind


class NoLimit(FinsheafError):
    pass


# --- cones ----------------------------------------------------------------------


@dataclass(frozen=True)
class Cone:
    """A vertex of the target category with one leg per shape object."""

    vertex: str
    legs: dict

    def key(self):
        return (self.vertex, tuple(sorted(self.legs.items())))


@dataclass(frozen=True)
class ConcreteCone:
    """A finite set with one leg map per shape object."""

    vertex: FinSet
    legs: dict


@dataclass(frozen=True)
class ConeCategoryResult:
    category: FiniteCategory
    cones: dict  # cone id -> Cone
    cone_ids: dict  # Cone.key() -> cone id


def _enumerate_cones(F, dual=False):
    """All cones (or cocones, when dual) on F, in deterministic order.

    Legs are chosen object by object with naturality pruning against the
    already-assigned legs.
    """
    shape, target = F.src, F.dst
    jobs = list(shape.objects)
    found = []
    for vertex in target.objects:
        def candidates(j):
            if dual:
                return target.hom(F.ob_map[j], vertex)
            return target.hom(vertex, F.ob_map[j])

        def natural_so_far(legs, j):
            for u in shape.morphisms:
                a, b = shape.dom[u], shape.cod[u]
                if a in legs and b in legs:
                    if dual:
                        # cocone: leg(b) . F(u) == leg(a)
                        if target.compose(legs[b], F.mor_map[u]) != legs[a]:
                            return False
                    else:
                        # cone: F(u) . leg(a) == leg(b)
                        if target.compose(F.mor_map[u], legs[a]) != legs[b]:
                            return False
            return True

        def extend(k, legs):
            if k == len(jobs):
                found.append(Cone(vertex, dict(legs)))
                return
            j = jobs[k]
            for leg in candidates(j):
                legs[j] = leg
                if natural_so_far(legs, j):
                    extend(k + 1, legs)
                del legs[j]

        extend(0, {})
    return found


def _cone_category(F, dual):
    """Build the category of (co)cones.  A morphism c -> d is a target morphism
    f: c.vertex -> d.vertex carrying one leg family to the other; composition
    is inherited from the target either way."""
    cones = _enumerate_cones(F, dual=dual)
    target = F.dst
    ids = {}
    table = {}
    for i, c in enumerate(cones):
        cid = "cone%d" % i
        ids[c.key()] = cid
        table[cid] = c
    morphisms = []
    identities = {}
    mor_meta = {}
    for cid, c in table.items():
        for did, d in table.items():
            for f in target.hom(c.vertex, d.vertex):
                if dual:
                    # cocone morphism: f . c.legs[j] == d.legs[j]
                    ok = all(
                        target.compose(f, c.legs[j]) == d.legs[j]
                        for j in F.src.objects
                    )
                else:
                    # cone morphism: d.legs[j] . f == c.legs[j]
                    ok = all(
                        target.compose(d.legs[j], f) == c.legs[j]
                        for j in F.src.objects
                    )
                if ok:
                    mid = "cm%d" % len(morphisms)
                    morphisms.append((mid, cid, did))
                    mor_meta[mid] = f
                    if cid == did and target.is_identity(f):
                        identities[cid] = mid
    lookup = {}
    for mid, s, d in morphisms:
        lookup[(s, d, mor_meta[mid])] = mid
    comp = {}
    for m1, s1, d1 in morphisms:
        for m2, s2, d2 in morphisms:
            if d1 == s2:
                composite = target.compose(mor_meta[m2], mor_meta[m1])
                comp[(m2, m1)] = lookup[(s1, d2, composite)]
    category = validate_category(list(table), morphisms, identities, comp)
    return ConeCategoryResult(category, table, ids), mor_meta


def cone_category(F):
    """The category of cones on F, enumerated exhaustively."""
    result, _ = _cone_category(F, dual=False)
    return result


def cocone_category(F):
    result, _ = _cone_category(F, dual=True)
    return result


@dataclass(frozen=True)
class AbstractLimit:
    cone: Cone
    cone_id: str
    cones: ConeCategoryResult
    terminal_ids: tuple
    witnesses: dict  # other terminal id -> (iso there, iso back) in the cone category


def _pick_extreme(F, dual):
    cc, _ = _cone_category(F, dual=dual)
    cat = cc.category
    extremes = []
    for cid in cat.objects:
        if dual:
            ok = all(len(cat.hom(cid, other)) == 1 for other in cat.objects)
        else:
            ok = all(len(cat.hom(other, cid)) == 1 for other in cat.objects)
        if ok:
            extremes.append(cid)
    if not extremes:
        return None, cc
    extremes.sort(key=lambda cid: cc.cones[cid].key())
    best = extremes[0]
    witnesses = {}
    for other in extremes[1:]:
        to = cat.hom(best, other)[0]
        fro = cat.hom(other, best)[0]
        if cat.compose(fro, to) != cat.identity_of(best):
            raise FinsheafError("terminal cones not mutually isomorphic")
        if cat.compose(to, fro) != cat.identity_of(other):
            raise FinsheafError("terminal cones not mutually isomorphic")
        witnesses[other] = (to, fro)
    return AbstractLimit(cc.cones[best], best, cc, tuple(extremes), witnesses), cc


def limit_abstract(F):
    """Terminal cone on F, or None when no limit exists."""
    result, _ = _pick_extreme(F, dual=False)
    return result


def colimit_abstract(F):
    """Initial cocone on F, or None."""
    result, _ = _pick_extreme(F, dual=True)
    return result


def mediating_morphism(F, limit, cone, dual=False):
    """The unique morphism carrying `cone` to the (co)limit cone; verified unique."""
    target = F.dst
    if dual:
        arrows = target.hom(limit.vertex, cone.vertex)
        hits = [
            f for f in arrows
            if all(target.compose(f, limit.legs[j]) == cone.legs[j] for j in F.src.objects)
        ]
    else:
        arrows = target.hom(cone.vertex, limit.vertex)
        hits = [
            f for f in arrows
            if all(target.compose(limit.legs[j], f) == cone.legs[j] for j in F.src.objects)
        ]
    if len(hits) != 1:
        raise NoLimit("expected exactly one mediating morphism, found %d" % len(hits))
    return hits[0]


# --- concrete limits ---------------------------------------------------------------


def limit_finset(F):
    """Limit in finite sets via the equalizer-inside-a-product construction.

    The vertex is carved out of the product of all values by equalizing the
    two comparison maps built from codomain projections and the diagram maps
    applied to domain projections.  Elements come out as compatible-family
    tuples indexed by the shape objects in order.
    """
    shape = F.cat
    jobs = list(shape.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    prod, projections = product([F.sets[a] for a in jobs])
    mors = [f for f in shape.morphisms]
    targets = [F.sets[shape.cod[f]] for f in mors]
    q, qprojs = product(targets)
    u = FinSetMap(prod, q, {t: tuple(t[pos[shape.cod[f]]] for f in mors) for t in prod})
    v = FinSetMap(
        prod, q,
        {t: tuple(F.maps[f](t[pos[shape.dom[f]]]) for f in mors) for t in prod},
    )
    sub = equalizer(u, v)
    legs = {
        a: FinSetMap(sub.carrier, F.sets[a], {t: t[pos[a]] for t in sub.carrier})
        for a in jobs
    }
    return ConcreteCone(sub.carrier, legs)


def compatible_families(F):
    """Brute-force oracle: nested loops over all value tuples, filtered by
    every diagram map condition.  Independent of the equalizer construction."""
    shape = F.cat
    jobs = list(shape.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    out = []
    for t in iproduct(*[F.sets[a].elements for a in jobs]):
        if all(
            F.maps[f](t[pos[shape.dom[f]]]) == t[pos[shape.cod[f]]]
            for f in shape.morphisms
        ):
            out.append(t)
    return FinSet(tuple(out))


def compatible_families_backtracking(F):
    """Same families as `compatible_families`, found by constraint propagation.

    Scales to diagrams whose full product is infeasible (filters with forced
    coordinates); returns the identical FinSet, tuples in product order.
    """
    shape = F.cat
    jobs = list(shape.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    constraints = [[] for _ in jobs]  # per target position: (src position, map)
    for f in shape.morphisms:
        constraints[pos[shape.cod[f]]].append((pos[shape.dom[f]], F.maps[f]))
    out = []

    def extend(k, partial):
        if k == len(jobs):
            out.append(tuple(partial))
            return
        forced = None
        for src, m in constraints[k]:
            if src < k:
                want = m(partial[src])
                if forced is None:
                    forced = want
                elif forced != want:
                    return
        candidates = [forced] if forced is not None else list(F.sets[jobs[k]])
        if forced is not None and forced not in F.sets[jobs[k]]:
            return
        for c in candidates:
            # forward conditions whose source is k and target already set
            ok = True
            for tgt in range(k):
                for src, m in constraints[tgt]:
                    if src == k and m(c) != partial[tgt]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            partial.append(c)
            extend(k + 1, partial)
            partial.pop()

    extend(0, [])
    return FinSet(tuple(out))


def limit_families(F):
    """Compatible families plus projection legs, via the scalable enumerator."""
    vertex = compatible_families_backtracking(F)
    jobs = list(F.cat.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    legs = {
        a: FinSetMap(vertex, F.sets[a], {t: t[pos[a]] for t in vertex})
        for a in jobs
    }
    return ConcreteCone(vertex, legs)


def colimit_finset(F):
    """Colimit in finite sets: coproduct of all values coequalized along the
    diagram maps.  Elements are tagged (object position, atom) representatives."""
    shape = F.cat
    jobs = list(shape.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    cop, embs = coproduct([F.sets[a] for a in jobs])
    mor_sets = [F.sets[shape.dom[f]] for f in shape.morphisms]
    src, src_embs = coproduct(mor_sets)
    u = FinSetMap(src, cop, {(i, x): (pos[shape.dom[shape.morphisms[i]]], x) for (i, x) in src})
    v = FinSetMap(
        src, cop,
        {(i, x): (pos[shape.cod[shape.morphisms[i]]], F.maps[shape.morphisms[i]](x)) for (i, x) in src},
    )
    from .finset import coequalizer

    vertex, proj = coequalizer(u, v)
    legs = {a: proj.compose(embs[pos[a]]) for a in jobs}
    return ConcreteCone(vertex, legs)


def colimit_classes_oracle(F):
    """Independent colimit oracle: zigzag closure of the identifications
    (dom-tagged atom) ~ (cod-tagged image) computed with a union-find over the
    tagged disjoint union."""
    shape = F.cat
    jobs = list(shape.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    cop, _ = coproduct([F.sets[a] for a in jobs])
    uf = _UnionFind(len(cop))
    for f in shape.morphisms:
        for x in F.sets[shape.dom[f]]:
            uf.union(
                cop.index((pos[shape.dom[f]], x)),
                cop.index((pos[shape.cod[f]], F.maps[f](x))),
            )
    classes = {}
    for e in cop:
        classes.setdefault(uf.find(cop.index(e)), set()).add(e)
    return {frozenset(c) for c in classes.values()}


# --- the second picture ---------------------------------------------------------------


@dataclass(frozen=True)
class SecondPictureReport:
    holds: bool
    every_cone_reaches_candidate: bool
    legs_jointly_monic: bool
    terminal_agrees: bool


def verify_second_picture(F, cone):
    """Abstract form: candidate is a limit iff every cone admits a morphism to
    it and its legs are jointly monic.  Also recomputes terminality in the cone
    category and reports whether the two verdicts agree."""
    target = F.dst
    cc = cone_category(F)
    cid = cc.cone_ids.get(cone.key())
    if cid is None:
        raise FinsheafError("candidate is not a cone on the diagram")
    cond1 = all(len(cc.category.hom(other, cid)) >= 1 for other in cc.category.objects)
    cond2 = True
    for w in target.objects:
        arrows = target.hom(w, cone.vertex)
        for f in arrows:
            for g in arrows:
                if f != g and all(
                    target.compose(cone.legs[j], f) == target.compose(cone.legs[j], g)
                    for j in F.src.objects
                ):
                    cond2 = False
    holds = cond1 and cond2
    terminal = all(len(cc.category.hom(other, cid)) == 1 for other in cc.category.objects)
    return SecondPictureReport(holds, cond1, cond2, holds == terminal)


def verify_second_picture_finset(F, cone):
    """Concrete form over finite sets, with cones ranging over all of Set.

    Every cone factors through the compatible-family cone, so condition (1)
    reduces to a mediating map out of the family set, and (2) to injectivity of
    the leg tuple map.  The conjunction must agree with "the canonical map to
    the family set is a bijection".
    """
    fam = compatible_families_backtracking(F)
    jobs = list(F.cat.objects)
    pos = {a: i for i, a in enumerate(jobs)}
    canonical = {t: tuple(cone.legs[a](t) for a in jobs) for t in cone.vertex}
    cond2 = len(set(canonical.values())) == len(canonical)
    cond1 = all(v in fam for v in canonical.values())
    if cond1:
        # mediating map fam -> vertex must exist: every family must be hit
        cond1 = set(canonical.values()) == set(fam.elements)
    holds = cond1 and cond2
    is_bijection = (
        all(v in fam for v in canonical.values())
        and len(set(canonical.values())) == len(cone.vertex)
        and len(cone.vertex) == len(fam)
    )
    return SecondPictureReport(holds, cond1, cond2, holds == is_bijection)


def verify_hom_preservation(F, cone, probe=None):
    """Covariant hom functors out of a probe must carry the candidate cone to a
    limit of the composed set diagram; quantifies over all probes by default."""
    target = F.dst
    probes = [probe] if probe is not None else list(target.objects)
    for k in probes:
        sets = {j: FinSet(target.hom(k, F.ob_map[j])) for j in F.src.objects}
        maps = {
            u: FinSetMap(
                sets[F.src.dom[u]], sets[F.src.cod[u]],
                {g: target.compose(F.mor_map[u], g) for g in sets[F.src.dom[u]]},
            )
            for u in F.src.morphisms
        }
        diagram = SetFunctor(F.src, sets, maps)
        fam = compatible_families_backtracking(diagram)
        jobs = list(F.src.objects)
        vertex_set = FinSet(target.hom(k, cone.vertex))
        canonical = {
            h: tuple(target.compose(cone.legs[j], h) for j in jobs) for h in vertex_set
        }
        if set(canonical.values()) != set(fam.elements) or len(
            set(canonical.values())
        ) != len(vertex_set):
            return False
    return True


def verify_cone_transport(F):
    """The cone category must be isomorphic to the slice of the Mor-category
    over (limit vertex, its identity): objects are morphisms into the vertex,
    morphisms are squares whose second component is that identity."""
    lim = limit_abstract(F)
    if lim is None:
        raise NoLimit("diagram has no limit")
    target = F.dst
    L = lim.cone.vertex
    mc = mor_category(target)
    id_l = target.identity_of(L)
    slice_obs = [f for f in target.morphisms if target.cod[f] == L]
    slice_mors = [
        sid for sid, sq in mc.squares.items()
        if sq.psi == id_l and target.cod[sq.src] == L and target.cod[sq.dst] == L
    ]
    from .fincat import subcategory

    slice_cat = subcategory(mc.category, slice_obs, slice_mors)
    cc = lim.cones
    # cones -> slice: send a cone to its mediating morphism
    to_slice_ob = {}
    for cid, cone in cc.cones.items():
        to_slice_ob[cid] = mediating_morphism(F, lim.cone, cone)
    # slice -> cones: pull the limit legs back along the morphism
    fro_ob = {}
    for f in slice_obs:
        legs = {j: target.compose(lim.cone.legs[j], f) for j in F.src.objects}
        fro_ob[f] = cc.cone_ids[Cone(target.dom[f], legs).key()]
    ob_round1 = all(fro_ob[to_slice_ob[cid]] == cid for cid in cc.cones)
    ob_round2 = all(to_slice_ob[fro_ob[f]] == f for f in slice_obs)
    # object-level bijection plus fully-faithful correspondence of hom sets
    hom_match = True
    for cid in cc.cones:
        for did in cc.cones:
            n_cone = len(cc.category.hom(cid, did))
            n_slice = len(slice_cat.hom(to_slice_ob[cid], to_slice_ob[did]))
            if n_cone != n_slice:
                hom_match = False
    return ob_round1 and ob_round2 and hom_match


# --- encodings -------------------------------------------------------------------------


@dataclass(frozen=True)
class FinSetEncoding:
    category: FiniteCategory
    object_of: dict  # object id -> FinSet
    map_of: dict  # morphism id -> FinSetMap
    id_of_set: dict  # position -> object id


def finset_as_category(sets):
    """Encode a list of finite sets as a category with ALL functions between
    them as morphisms.  Feasible only for very small sets; used to cross-check
    concrete constructions against the abstract terminal-cone search."""
    object_ids = ["S%d" % i for i in range(len(sets))]
    object_of = dict(zip(object_ids, sets))
    morphisms = []
    map_of = {}
    lookup = {}
    for i, a in enumerate(object_ids):
        for j, b in enumerate(object_ids):
            tables = [
                dict(zip(sets[i].elements, choice))
                for choice in iproduct(sets[j].elements, repeat=len(sets[i]))
            ]
            if len(sets[i]) == 0:
                tables = [{}]
            for t in tables:
                mid = "m%d" % len(morphisms)
                morphisms.append((mid, a, b))
                map_of[mid] = FinSetMap(sets[i], sets[j], t)
                lookup[(a, b, tuple(sorted(t.items(), key=lambda kv: sets[i].index(kv[0]))))] = mid
    identities = {}
    for i, a in enumerate(object_ids):
        t = {x: x for x in sets[i]}
        identities[a] = lookup[(a, a, tuple(sorted(t.items(), key=lambda kv: sets[i].index(kv[0]))))]
    comp = {}
    dom = {m[0]: m[1] for m in morphisms}
    cod = {m[0]: m[2] for m in morphisms}
    for m1, a1, b1 in morphisms:
        for m2, a2, b2 in morphisms:
            if b1 == a2:
                table = map_of[m2].compose(map_of[m1]).table
                s = object_of[a1]
                comp[(m2, m1)] = lookup[(a1, b2, tuple(sorted(table.items(), key=lambda kv: s.index(kv[0]))))]
    category = validate_category(object_ids, morphisms, identities, comp)
    return FinSetEncoding(category, object_of, map_of, {i: o for i, o in enumerate(object_ids)})
