"""Deterministic fixture generators shared by the check suites and the tests.

Everything is seeded; two runs with the same arguments produce identical
structures, which the reporting layer relies on for byte-stable output.
"""

from __future__ import annotations

import random
from itertools import product as iproduct

from .fincat import (
    FiniteCategory,
    SetFunctor,
    discrete_category,
    monoid_category,
    parallel_pair_category,
    poset_category,
    validate_category,
)
from .finset import FinSet, FinSetMap
from .sheaf import Copresheaf, Presheaf, quotient_presheaf
from .topalg import enumerate_topologies, from_topology

POINT_NAMES = ("a", "b", "c", "d", "e")

_topology_cache = {}


def corpus_topologies(n):
    """All topologies on n named points, cached."""
    if n not in _topology_cache:
        _topology_cache[n] = enumerate_topologies(POINT_NAMES[:n])
    return _topology_cache[n]


_algebra_cache = {}


def corpus_spaces(max_points, min_points=0):
    """Open-set algebras of every topology on min_points..max_points points."""
    out = []
    for n in range(min_points, max_points + 1):
        if n not in _algebra_cache:
            _algebra_cache[n] = [
                from_topology(POINT_NAMES[:n], opens) for opens in corpus_topologies(n)
            ]
        out.extend(_algebra_cache[n])
    return out


def inclusion_cosheaf(osa):
    """The cosheaf of a space: each open is its own point set, extensions are
    the literal inclusions."""
    alg = osa.algebra
    sets = {e: FinSet(tuple(sorted(osa.open_of[e], key=osa.points.index))) for e in alg.elements}
    maps = {}
    for x, y in alg.comparable_pairs():
        maps[(x, y)] = FinSetMap(sets[x], sets[y], {p: p for p in sets[x]})
    return Copresheaf(alg, sets, maps)


# --- random set diagrams (free-composition shapes) -----------------------------------


def chain_category(n):
    els = [str(i) for i in range(n)]
    return poset_category(els, [(a, b) for a in els for b in els if int(a) <= int(b)])


def random_set_diagram(rng):
    """One random diagram over a pool of shapes whose composition is forced,
    with value sets of at most 3 elements."""
    kind = rng.choice(
        ["discrete", "chain2", "chain3", "parallel", "span", "cospan", "wedge"]
    )

    def rs(name):
        return FinSet(tuple("%s%d" % (name, i) for i in range(rng.randint(0, 3))))

    def rm(a, b):
        if len(b) == 0 and len(a) > 0:
            return None
        return FinSetMap(a, b, {x: rng.choice(b.elements) for x in a})

    while True:
        if kind == "discrete":
            names = ["o%d" % i for i in range(rng.randint(0, 4))]
            shape = discrete_category(names)
            sets = {n: rs(n) for n in names}
            maps = {shape.identity_of(n): FinSetMap.identity(sets[n]) for n in names}
            return SetFunctor(shape, sets, maps)
        if kind in ("chain2", "chain3"):
            n = 2 if kind == "chain2" else 3
            shape = chain_category(n)
            sets = {str(i): rs("c%d" % i) for i in range(n)}
            step = {}
            ok = True
            for i in range(n - 1):
                m = rm(sets[str(i)], sets[str(i + 1)])
                if m is None:
                    ok = False
                    break
                step[i] = m
            if not ok:
                kind = "discrete"
                continue
            maps = {}
            for f in shape.morphisms:
                a, b = int(shape.dom[f]), int(shape.cod[f])
                m = FinSetMap.identity(sets[str(a)])
                for i in range(a, b):
                    m = step[i].compose(m)
                maps[f] = m
            return SetFunctor(shape, sets, maps)
        if kind == "parallel":
            shape = parallel_pair_category()
            a, b = rs("a"), rs("b")
            m1, m2 = rm(a, b), rm(a, b)
            if m1 is None or m2 is None:
                kind = "discrete"
                continue
            return SetFunctor(
                shape,
                {"A": a, "B": b},
                {
                    "id_A": FinSetMap.identity(a),
                    "id_B": FinSetMap.identity(b),
                    "f1": m1,
                    "f2": m2,
                },
            )
        if kind == "span":
            shape = poset_category(["a", "b", "c"], [("a", "b"), ("a", "c")])
            arrows = [("a", "b"), ("a", "c")]
        elif kind == "cospan":
            shape = poset_category(["a", "b", "c"], [("b", "a"), ("c", "a")])
            arrows = [("b", "a"), ("c", "a")]
        else:
            shape = poset_category(["b1", "b2", "m"], [("b1", "m"), ("b2", "m")])
            arrows = [("b1", "m"), ("b2", "m")]
        sets = {o: rs(o) for o in shape.objects}
        maps = {shape.identity_of(o): FinSetMap.identity(sets[o]) for o in shape.objects}
        ok = True
        for u, v in arrows:
            m = rm(sets[u], sets[v])
            if m is None:
                ok = False
                break
            maps["%s<=%s" % (u, v)] = m
        if not ok:
            kind = "discrete"
            continue
        return SetFunctor(shape, sets, maps)


# --- random (co)presheaves over an algebra ----------------------------------------------


def anchored_presheaf(alg, anchors):
    """Presheaf whose value at x indexes the anchors above x; restrictions are
    the index inclusions.  Always functorial, rarely a sheaf."""
    sets = {}
    for x in alg.elements:
        sets[x] = FinSet(tuple("s%d" % i for i, a in enumerate(anchors) if alg.leq(x, a)))
    maps = {}
    for x, y in alg.comparable_pairs():
        maps[(x, y)] = FinSetMap(sets[y], sets[x], {s: s for s in sets[y]})
    return Presheaf(alg, sets, maps)


def anchored_copresheaf(alg, anchors):
    sets = {}
    for x in alg.elements:
        sets[x] = FinSet(tuple("s%d" % i for i, a in enumerate(anchors) if alg.leq(a, x)))
    maps = {}
    for x, y in alg.comparable_pairs():
        maps[(x, y)] = FinSetMap(sets[x], sets[y], {s: s for s in sets[x]})
    return Copresheaf(alg, sets, maps)


def _close_presheaf_partition(F, seeds):
    """Smallest restriction-compatible per-element partition containing the
    seed identifications (x, atom, atom)."""
    alg = F.algebra
    parent = {(x, a): (x, a) for x in alg.elements for a in F.sets[x]}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def union(k1, k2):
        r1, r2 = find(k1), find(k2)
        if r1 != r2:
            parent[max(r1, r2, key=str)] = min(r1, r2, key=str)

    for x, a, b in seeds:
        union((x, a), (x, b))
    changed = True
    while changed:
        changed = False
        groups = {}
        for k in parent:
            groups.setdefault(find(k), []).append(k)
        for members in groups.values():
            by_element = {}
            for x, a in members:
                by_element.setdefault(x, []).append(a)
            for y, atoms in by_element.items():
                if len(atoms) < 2:
                    continue
                for x in F.algebra.elements:
                    if x != y and alg.leq(x, y):
                        res = F.res(x, y)
                        base = res(atoms[0])
                        for a in atoms[1:]:
                            if find((x, base)) != find((x, res(a))):
                                union((x, base), (x, res(a)))
                                changed = True
    partitions = {}
    for x in alg.elements:
        groups = {}
        for a in F.sets[x]:
            groups.setdefault(find((x, a)), []).append(a)
        partitions[x] = [frozenset(g) for g in groups.values()]
    return partitions


def random_presheaf(alg, rng):
    """Anchored presheaf with a random compatible collapse on top."""
    n_anchors = rng.randint(1, 3)
    anchors = [rng.choice(alg.elements) for _ in range(n_anchors)]
    F = anchored_presheaf(alg, anchors)
    seeds = []
    for _ in range(rng.randint(0, 2)):
        x = rng.choice(alg.elements)
        atoms = F.sets[x].elements
        if len(atoms) >= 2:
            a, b = rng.sample(atoms, 2)
            seeds.append((x, a, b))
    if seeds:
        partitions = _close_presheaf_partition(F, seeds)
        F, _ = quotient_presheaf(F, partitions)
    return F


def random_copresheaf(alg, rng):
    """Anchored copresheaf with a random extension-compatible collapse."""
    n_anchors = rng.randint(1, 3)
    anchors = [rng.choice(alg.elements) for _ in range(n_anchors)]
    G = anchored_copresheaf(alg, anchors)
    # collapse: identify random atoms at an element, then push the
    # identification upward along extensions until stable
    parent = {(x, a): (x, a) for x in alg.elements for a in G.sets[x]}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def union(k1, k2):
        r1, r2 = find(k1), find(k2)
        if r1 != r2:
            parent[max(r1, r2, key=str)] = min(r1, r2, key=str)

    for _ in range(rng.randint(0, 2)):
        x = rng.choice(alg.elements)
        atoms = G.sets[x].elements
        if len(atoms) >= 2:
            a, b = rng.sample(atoms, 2)
            union((x, a), (x, b))
    changed = True
    while changed:
        changed = False
        groups = {}
        for k in parent:
            groups.setdefault(find(k), []).append(k)
        for members in groups.values():
            by_element = {}
            for x, a in members:
                by_element.setdefault(x, []).append(a)
            for y, atoms in by_element.items():
                if len(atoms) < 2:
                    continue
                for z in alg.above(y):
                    if z == y:
                        continue
                    ext = G.ext(y, z)
                    base = ext(atoms[0])
                    for a in atoms[1:]:
                        if find((z, base)) != find((z, ext(a))):
                            union((z, base), (z, ext(a)))
                            changed = True
    rep_of = {}
    for x in alg.elements:
        for a in G.sets[x]:
            rep_of[(x, a)] = find((x, a))[1]
    sets = {
        x: FinSet(tuple(a for a in G.sets[x] if rep_of[(x, a)] == a))
        for x in alg.elements
    }
    maps = {}
    for x, y in alg.comparable_pairs():
        ext = G.ext(x, y)
        maps[(x, y)] = FinSetMap(
            sets[x], sets[y], {a: rep_of[(y, ext(a))] for a in sets[x]}
        )
    return Copresheaf(alg, sets, maps)


# --- generated categories with isomorphism classes ---------------------------------------


def clone_category(base, multiplicities):
    """Clone every object of `base` the given number of times.  Hom classes
    between clones copy the base hom classes, so clones of one object are all
    isomorphic and every class carries obvious cochain choices."""
    objects = []
    for a in base.objects:
        for i in range(multiplicities[a]):
            objects.append("%s#%d" % (a, i))
    morphisms = []
    for f in base.morphisms:
        a, b = base.dom[f], base.cod[f]
        for i in range(multiplicities[a]):
            for j in range(multiplicities[b]):
                morphisms.append(("%s#%d#%d" % (f, i, j), "%s#%d" % (a, i), "%s#%d" % (b, j)))
    identities = {
        "%s#%d" % (a, i): "%s#%d#%d" % (base.identity_of(a), i, i)
        for a in base.objects
        for i in range(multiplicities[a])
    }
    comp = {}
    for f in base.morphisms:
        fa, fb = base.dom[f], base.cod[f]
        for g in base.morphisms:
            ga, gb = base.dom[g], base.cod[g]
            if fb != ga:
                continue
            h = base.compose(g, f)
            for i in range(multiplicities[fa]):
                for j in range(multiplicities[fb]):
                    for k in range(multiplicities[gb]):
                        comp[("%s#%d#%d" % (g, j, k), "%s#%d#%d" % (f, i, j))] = (
                            "%s#%d#%d" % (h, i, k)
                        )
    cat = validate_category(objects, morphisms, identities, comp)
    classes = tuple(
        frozenset("%s#%d" % (a, i) for i in range(multiplicities[a]))
        for a in base.objects
    )
    return cat, classes


def random_poset_category(rng, n):
    els = ["P%d" % i for i in range(n)]
    rel = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                rel.add((els[i], els[j]))
    closed = set(rel)
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for b2, c in list(closed):
                if b == b2 and (a, c) not in closed:
                    closed.add((a, c))
                    changed = True
    return poset_category(els, sorted(closed))


def z_n_category(n):
    els = ["r%d" % i for i in range(n)]
    return monoid_category(
        "G", els, lambda a, b: "r%d" % ((int(a[1:]) + int(b[1:])) % n), "r0"
    )


def generated_iso_class_categories(count, seed=20240817):
    """Cloned categories with nontrivial isomorphism classes, deterministic."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        pick = rng.random()
        if pick < 0.5:
            base = random_poset_category(rng, rng.randint(1, 3))
        elif pick < 0.8:
            base = z_n_category(rng.choice([2, 3]))
        else:
            base = chain_category(2)
        multiplicities = {a: rng.randint(1, 3) for a in base.objects}
        if all(m == 1 for m in multiplicities.values()):
            multiplicities[base.objects[0]] = 2
        cat, classes = clone_category(base, multiplicities)
        if len(cat.morphisms) <= 40:
            out.append((cat, classes, base))
    return out


# --- hand-built sheafification triples -----------------------------------------------------


def small_algebras():
    """A spread of small frames: chains, the diamond, and open-set lattices of
    two- and three-point spaces."""
    out = []
    for opens in corpus_topologies(2):
        out.append(from_topology(POINT_NAMES[:2], opens).algebra)
    chain3 = [
        frozenset(),
        frozenset({"a"}),
        frozenset({"a", "b"}),
    ]
    out.append(from_topology(POINT_NAMES[:2], chain3).algebra)
    picks = [0, 7, 14, 28]
    tops3 = corpus_topologies(3)
    for k in picks:
        out.append(from_topology(POINT_NAMES[:3], tops3[k]).algebra)
    seen = set()
    unique = []
    for alg in out:
        key = (alg.elements, tuple(sorted(alg.leq_pairs)))
        if key not in seen:
            seen.add(key)
            unique.append(alg)
    return unique


def sheafification_triples(minimum=20, seed=7):
    """Hand-built (presheaf, sheaf, nat) triples with value sets of <= 3.

    For each small algebra and anchor pattern: the section-space nat, the
    sheafification unit itself, and the collapse onto the terminal sheaf.
    """
    from .sheaf import PresheafNat, section_fiber_spaces

    rng = random.Random(seed)
    triples = []
    for alg in small_algebras():
        anchor_patterns = [
            [alg.top],
            [alg.top, alg.top],
            [rng.choice(alg.elements), alg.top],
        ]
        for anchors in anchor_patterns:
            F = anchored_presheaf(alg, anchors)
            if any(len(F.sets[x]) > 3 for x in alg.elements):
                continue
            sfr = section_fiber_spaces(F)
            if all(len(sfr.sec.sets[x]) <= 3 for x in alg.elements):
                triples.append((F, sfr.sec, sfr.alpha_sec))
            ones = {x: FinSet(("*",)) for x in alg.elements}
            terminal = Presheaf(
                alg, ones,
                {
                    (x, y): FinSetMap(ones[y], ones[x], {"*": "*"})
                    for x, y in alg.comparable_pairs()
                },
            )
            collapse = PresheafNat(
                F, terminal,
                {
                    x: FinSetMap(F.sets[x], ones[x], {a: "*" for a in F.sets[x]})
                    for x in alg.elements
                },
            )
            triples.append((F, terminal, collapse))
            if len(triples) >= minimum + 4:
                return triples
    return triples
