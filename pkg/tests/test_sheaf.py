import random

import pytest

from finsheaf.finset import FinSet, FinSetMap
from finsheaf.fixtures import (
    anchored_copresheaf,
    anchored_presheaf,
    corpus_spaces,
    corpus_topologies,
    inclusion_cosheaf,
    random_copresheaf,
    random_presheaf,
    sheafification_triples,
)
from finsheaf.sheaf import (
    Copresheaf,
    Incompatible,
    IncompatiblePartition,
    Presheaf,
    PresheafNat,
    apex_predicates,
    compose_presheaf_nats,
    costalk,
    enumerate_presheaf_nats,
    factor_through_sheafification,
    glue_local_sheaves,
    hom_sheaf,
    identity_presheaf_nat,
    is_cosheaf,
    is_sheaf,
    iso_over_top_exists,
    precompose,
    presheaf_tables_equal,
    quotient_presheaf,
    quotient_sheaf,
    restrict,
    section_fiber_spaces,
    set_representation_copresheaf,
    sheafify,
    sheafify_nat,
    stalk,
    t_nat_of_hom,
)
from finsheaf.topalg import (
    AlgebraHom,
    from_topology,
    identity_hom,
    particles,
    set_representation,
    validate_algebra,
)


def sierpinski_algebra():
    return from_topology(
        ["a", "b"], [frozenset(), frozenset({"a"}), frozenset({"a", "b"})]
    ).algebra


def chain_algebra(n):
    els = ["c%d" % i for i in range(n)]
    leq = [(els[i], els[j]) for i in range(n) for j in range(n) if i <= j]
    return validate_algebra(els, leq)


def constant_presheaf(alg, atoms):
    sets = {x: FinSet(tuple(atoms)) for x in alg.elements}
    maps = {
        (x, y): FinSetMap(sets[y], sets[x], {a: a for a in atoms})
        for x, y in alg.comparable_pairs()
    }
    return Presheaf(alg, sets, maps)


def test_constant_two_set_is_not_a_sheaf():
    alg = sierpinski_algebra()
    F = constant_presheaf(alg, ["u", "v"])
    report = is_sheaf(F)
    assert not report.ok
    assert report.witness[0] == alg.bottom


def test_inclusion_cosheaf_over_three_point_corpus():
    for opens in corpus_topologies(3):
        osa = from_topology(["a", "b", "c"], opens)
        G = inclusion_cosheaf(osa)
        assert is_cosheaf(G).ok


def test_antichain_reduction_matches_exhaustive_scan():
    # the default (antichain) gluing scan must agree with the all-subsets scan
    rng = random.Random(4)
    algebras = [a.algebra for a in corpus_spaces(2)] + [sierpinski_algebra()]
    for alg in algebras:
        for _ in range(6):
            F = random_presheaf(alg, rng)
            assert is_sheaf(F).ok == is_sheaf(F, exhaustive=True).ok
            G = random_copresheaf(alg, rng)
            assert is_cosheaf(G).ok == is_cosheaf(G, exhaustive=True).ok


def test_section_space_is_sheaf_and_fiber_space_is_cosheaf():
    rng = random.Random(11)
    spaces = corpus_spaces(3)
    for _ in range(25):
        osa = rng.choice(spaces)
        F = random_presheaf(osa.algebra, rng)
        sfr = section_fiber_spaces(F)
        assert is_sheaf(sfr.sec).ok
        assert is_cosheaf(sfr.fib).ok
        G = random_copresheaf(osa.algebra, rng)
        sfr2 = section_fiber_spaces(G)
        assert is_sheaf(sfr2.sec).ok
        assert is_cosheaf(sfr2.fib).ok


# --- restriction / precomposition ----------------------------------------------------


def test_restrict_to_top_is_identity():
    alg = sierpinski_algebra()
    F = anchored_presheaf(alg, [alg.top, "{a}"])
    assert presheaf_tables_equal(restrict(F, alg.top), F)


def test_restrict_twice_is_restrict_to_meet():
    alg = sierpinski_algebra()
    F = anchored_presheaf(alg, [alg.top, "{a}"])
    once = restrict(F, "{a}")
    twice = restrict(once, "{a}")
    assert presheaf_tables_equal(once, twice)


def test_precompose_with_identity_hom():
    alg = sierpinski_algebra()
    F = anchored_presheaf(alg, [alg.top])
    assert presheaf_tables_equal(precompose(F, identity_hom(alg)), F)


def test_restriction_of_sheaf_is_sheaf():
    rng = random.Random(5)
    for osa in corpus_spaces(3, min_points=2)[:10]:
        F = random_presheaf(osa.algebra, rng)
        shf = sheafify(F)
        for y in osa.algebra.elements:
            assert is_sheaf(restrict(shf.sheaf, y)).ok


# --- gluing local sheaves ---------------------------------------------------------------


def test_single_member_family_glues_to_itself():
    alg = sierpinski_algebra()
    F = sheafify(anchored_presheaf(alg, [alg.top])).sheaf
    local = restrict(F, "{a}")
    glued = glue_local_sheaves(alg, [("{a}", local)])
    assert presheaf_tables_equal(glued, local)


def test_split_and_reglue_round_trip():
    # diamond algebra: opens of the discrete two-point space
    osa = from_topology(
        ["a", "b"],
        [frozenset(), frozenset({"a"}), frozenset({"b"}), frozenset({"a", "b"})],
    )
    alg = osa.algebra
    F = sheafify(anchored_presheaf(alg, [alg.top, "{a}"])).sheaf
    fam = [("{a}", restrict(F, "{a}")), ("{b}", restrict(F, "{b}"))]
    glued = glue_local_sheaves(alg, fam)
    assert is_sheaf(glued).ok
    assert presheaf_tables_equal(restrict(glued, "{a}"), fam[0][1])
    assert presheaf_tables_equal(restrict(glued, "{b}"), fam[1][1])
    # same sections at the top up to the canonical identification
    assert len(glued.sets[alg.top]) == len(F.sets[alg.top])


def test_incompatible_family_reports_witness():
    osa = from_topology(
        ["a", "b"],
        [frozenset(), frozenset({"a"}), frozenset({"b"}), frozenset({"a", "b"})],
    )
    alg = osa.algebra
    F = sheafify(anchored_presheaf(alg, [alg.top, "{a}"])).sheaf
    local_a = restrict(F, "{a}")
    # doctor the b-side: a different number of sections at bottom is caught by
    # the presheaf validator, so instead collapse {b}'s value set
    G = sheafify(anchored_presheaf(alg, [alg.top])).sheaf
    local_b = restrict(G, "{b}")
    if presheaf_tables_equal(restrict(local_a, alg.bottom), restrict(local_b, alg.bottom)):
        if len(local_a.sets["{a}"]) != len(local_b.sets["{b}"]):
            with pytest.raises(Incompatible):
                # incompatibility shows below the meet only when tables differ;
                # meet is bottom here, so force a genuine overlap via {a} twice
                glue_local_sheaves(alg, [("{a}", local_a), ("{a}", restrict(G, "{a}"))])


# --- stalks -------------------------------------------------------------------------------


def test_constant_singleton_presheaf_has_singleton_stalks():
    alg = sierpinski_algebra()
    F = constant_presheaf(alg, ["*"])
    for p in particles(alg):
        s = stalk(F, p)
        assert len(s.germs) == 1


def test_germ_maps_commute_with_restrictions():
    rng = random.Random(21)
    for osa in corpus_spaces(3, min_points=2)[:8]:
        alg = osa.algebra
        F = random_presheaf(alg, rng)
        for p in particles(alg):
            s = stalk(F, p)
            for x in p.members:
                for y in p.members:
                    if alg.leq(x, y):
                        # germ at y equals germ of the restriction at x
                        for a in F.sets[y]:
                            assert s.germ_maps[y](a) == s.germ_maps[x](F.res(x, y)(a))


def test_stalk_classes_match_union_find_oracle():
    rng = random.Random(31)
    alg = sierpinski_algebra()
    F = random_presheaf(alg, rng)
    for p in particles(alg):
        s = stalk(F, p)
        # independent closure: repeatedly merge classes linked by a restriction
        atoms = [(x, a) for x in sorted(p.members, key=alg.index) for a in F.sets[x]]
        classes = [{t} for t in atoms]

        def merge(t1, t2):
            hit = [c for c in classes if t1 in c or t2 in c]
            if len(hit) == 2:
                hit[0] |= hit[1]
                classes.remove(hit[1])

        for x in p.members:
            for y in p.members:
                if alg.leq(x, y):
                    for a in F.sets[y]:
                        merge((y, a), (x, F.res(x, y)(a)))
        got = {}
        for x, a in atoms:
            got.setdefault(s.germ_maps[x](a), set()).add((x, a))
        assert {frozenset(c) for c in classes} == {frozenset(v) for v in got.values()}


def test_costalk_of_inclusion_cosheaf_is_intersection():
    for opens in corpus_topologies(3):
        osa = from_topology(["a", "b", "c"], opens)
        G = inclusion_cosheaf(osa)
        for p in particles(osa.algebra):
            c = costalk(G, p)
            expected = set(osa.points)
            for e in p.members:
                expected &= osa.open_of[e]
            assert len(c.families) == len(expected)


# --- section/fiber spaces -------------------------------------------------------------------


def test_no_particles_gives_singleton_sections():
    alg = chain_algebra(1)
    F = constant_presheaf(alg, ["u", "v"])
    sfr = section_fiber_spaces(F)
    for x in alg.elements:
        assert len(sfr.sec.sets[x]) == 1
        assert len(sfr.fib.sets[x]) == 0


def test_two_chain_section_space_matches_value():
    alg = chain_algebra(2)
    F = constant_presheaf(alg, ["u", "v"])
    sfr = section_fiber_spaces(F)
    assert len(sfr.sec.sets["c1"]) == 2  # one particle, stalk of size 2


# --- apexness ---------------------------------------------------------------------------------


def test_inclusion_cosheaf_is_apex_on_corpus():
    for opens in corpus_topologies(3):
        osa = from_topology(["a", "b", "c"], opens)
        preds = apex_predicates(inclusion_cosheaf(osa))
        assert preds == {"preapex": True, "apex": True}


def test_constant_copresheaf_preapex_but_not_apex():
    alg = sierpinski_algebra()
    sets = {x: FinSet(("u",)) for x in alg.elements}
    maps = {
        (x, y): FinSetMap(sets[x], sets[y], {"u": "u"})
        for x, y in alg.comparable_pairs()
    }
    G = Copresheaf(alg, sets, maps)
    preds = apex_predicates(G)
    assert preds["preapex"]
    assert not preds["apex"]


def test_empty_valued_copresheaf_preapex():
    alg = chain_algebra(2)
    sets = {"c0": FinSet(()), "c1": FinSet(("a",))}
    maps = {("c0", "c1"): FinSetMap(sets["c0"], sets["c1"], {})}
    G = Copresheaf(alg, sets, maps)
    assert apex_predicates(G)["preapex"]


def test_apex_flags_match_brute_force_iso_search():
    rng = random.Random(77)
    alg = sierpinski_algebra()
    for _ in range(8):
        F = random_presheaf(alg, rng)
        preds = apex_predicates(F)
        if preds["preapex"]:
            expected_apex = not any(
                iso_over_top_exists(F, x, y)
                for x in alg.elements
                for y in alg.elements
                if x != y
            )
            assert preds["apex"] == expected_apex


def test_preapex_implies_all_restrictions_epic():
    rng = random.Random(78)
    for osa in corpus_spaces(3, min_points=2)[:10]:
        alg = osa.algebra
        F = random_presheaf(alg, rng)
        if apex_predicates(F)["preapex"]:
            for x, y in alg.comparable_pairs():
                assert F.res(x, y).is_surjective()


# --- sheafification ---------------------------------------------------------------------------


def test_sheafifying_a_sheaf_gives_bijective_unit():
    rng = random.Random(13)
    for osa in corpus_spaces(3, min_points=2)[:10]:
        F = random_presheaf(osa.algebra, rng)
        G = sheafify(F).sheaf
        again = sheafify(G)
        for x in osa.algebra.elements:
            assert again.theta.components[x].is_bijective()


def test_sheafification_fixes_bottom_violation():
    alg = sierpinski_algebra()
    F = constant_presheaf(alg, ["u", "v"])
    shf = sheafify(F)
    assert len(shf.sheaf.sets[alg.bottom]) == 1
    assert is_sheaf(shf.sheaf).ok


def test_sheafification_idempotent_up_to_bijection():
    alg = sierpinski_algebra()
    F = anchored_presheaf(alg, [alg.top, "{a}"])
    shf = sheafify(F)
    again = sheafify(shf.sheaf)
    for x in alg.elements:
        assert len(again.sheaf.sets[x]) == len(shf.sheaf.sets[x])
        assert again.theta.components[x].is_bijective()


def test_universal_property_exactly_one_factorization():
    count = 0
    for F, G, alpha in sheafification_triples(minimum=6):
        shf = sheafify(F)
        direct = factor_through_sheafification(shf, G, alpha)
        matches = [
            nat
            for nat in enumerate_presheaf_nats(shf.sheaf, G)
            if all(
                nat.components[x].compose(shf.theta.components[x]).table
                == alpha.components[x].table
                for x in F.algebra.elements
            )
        ]
        assert len(matches) == 1
        assert matches[0].components == {
            x: direct.components[x] for x in F.algebra.elements
        } or all(
            matches[0].components[x].table == direct.components[x].table
            for x in F.algebra.elements
        )
        count += 1
        if count >= 6:
            break
    assert count == 6


def test_sheafify_nat_identity_and_composition():
    alg = sierpinski_algebra()
    F = anchored_presheaf(alg, [alg.top, "{a}"])
    shf = sheafify(F)
    lifted = sheafify_nat(identity_presheaf_nat(F), shf, shf)
    for x in alg.elements:
        assert lifted.components[x].table == {t: t for t in shf.sheaf.sets[x]}
    # composition: collapse F onto a smaller presheaf, then to the terminal one
    G = anchored_presheaf(alg, [alg.top])
    alpha = PresheafNat(
        F, G,
        {
            x: FinSetMap(F.sets[x], G.sets[x], {a: "s0" for a in F.sets[x]})
            for x in alg.elements
        },
    )
    ones = constant_presheaf(alg, ["*"])
    # make the terminal target a sheaf: collapse bottom not needed (singleton everywhere)
    beta = PresheafNat(
        G, ones,
        {
            x: FinSetMap(G.sets[x], ones.sets[x], {a: "*" for a in G.sets[x]})
            for x in alg.elements
        },
    )
    shf_G = sheafify(G)
    shf_O = sheafify(ones)
    ba = compose_presheaf_nats(beta, alpha)
    lhs = sheafify_nat(ba, shf, shf_O)
    rhs = compose_presheaf_nats(sheafify_nat(beta, shf_G, shf_O), sheafify_nat(alpha, shf, shf_G))
    for x in alg.elements:
        assert lhs.components[x].table == rhs.components[x].table


def test_precomposition_commutes_with_sheafification_up_to_iso():
    # restriction hom X -> {a}^<= : z |-> z ∧ {a}
    osa = from_topology(
        ["a", "b"],
        [frozenset(), frozenset({"a"}), frozenset({"b"}), frozenset({"a", "b"})],
    )
    alg = osa.algebra
    from finsheaf.topalg import subalgebra

    sub = subalgebra(alg, "{a}")
    f = AlgebraHom(alg, sub, {x: alg.meet(x, "{a}") for x in alg.elements})
    F = anchored_presheaf(sub, [sub.top, sub.top])
    lhs = sheafify(precompose(F, f)).sheaf  # sheafify after precomposing
    rhs = precompose(sheafify(F).sheaf, f)  # precompose the sheafification
    assert is_sheaf(lhs).ok and is_sheaf(rhs).ok
    # germ labels differ; compare componentwise cardinalities and a bijection
    # commuting with restrictions found by search
    assert _isomorphic_presheaves(lhs, rhs)


def _isomorphic_presheaves(F, G):
    alg = F.algebra
    if any(len(F.sets[x]) != len(G.sets[x]) for x in alg.elements):
        return False
    from itertools import permutations

    order = sorted(alg.elements, key=lambda x: -len(alg.below(x)))

    def extend(k, chosen):
        if k == len(order):
            return True
        x = order[k]
        for perm in permutations(G.sets[x].elements):
            table = dict(zip(F.sets[x].elements, perm))
            ok = True
            for y in order[:k]:
                lo, hi = (x, y) if alg.leq(x, y) else (y, x)
                if not alg.leq(lo, hi):
                    continue
                for s in F.sets[hi]:
                    target = table if lo == x else chosen[y]
                    source = chosen[y] if lo == x else table
                    if target[F.res(lo, hi)(s)] != G.res(lo, hi)(source[s]):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                chosen[x] = table
                if extend(k + 1, chosen):
                    return True
                del chosen[x]
        return False

    return extend(0, {})


# --- quotient sheaves ---------------------------------------------------------------------------


def test_trivial_partition_quotient_is_isomorphic():
    alg = sierpinski_algebra()
    F = sheafify(anchored_presheaf(alg, [alg.top, "{a}"])).sheaf
    partitions = {x: [[a] for a in F.sets[x]] for x in alg.elements}
    result = quotient_sheaf(F, partitions)
    for x in alg.elements:
        assert len(result.sheafification.sheaf.sets[x]) == len(F.sets[x])


def test_total_collapse_gives_singleton_sheaf():
    alg = sierpinski_algebra()
    F = sheafify(anchored_presheaf(alg, [alg.top, "{a}"])).sheaf
    partitions = {x: [list(F.sets[x].elements)] if len(F.sets[x]) else [] for x in alg.elements}
    result = quotient_sheaf(F, partitions)
    for x in alg.elements:
        assert len(result.sheafification.sheaf.sets[x]) == 1


def test_two_class_collapse_is_sheaf():
    alg = sierpinski_algebra()
    F = sheafify(anchored_presheaf(alg, [alg.top, alg.top])).sheaf
    # collapse the two germs at {a} only if that stays compatible; build the
    # compatible closure by collapsing at the top instead
    top_atoms = F.sets[alg.top].elements
    partitions = {alg.top: [list(top_atoms)]}
    for x in alg.elements:
        if x != alg.top:
            partitions[x] = [[a] for a in F.sets[x]]
    try:
        result = quotient_sheaf(F, partitions)
    except IncompatiblePartition:
        # collapse everywhere along the restriction closure
        partitions = {
            x: [list(F.sets[x].elements)] if len(F.sets[x]) else []
            for x in alg.elements
        }
        result = quotient_sheaf(F, partitions)
    assert is_sheaf(result.sheafification.sheaf).ok


def test_incompatible_partition_rejected():
    alg = chain_algebra(2)
    sets = {"c0": FinSet(("u", "v")), "c1": FinSet(("x", "y"))}
    maps = {("c0", "c1"): FinSetMap(sets["c1"], sets["c0"], {"x": "u", "y": "v"})}
    F = Presheaf(alg, sets, maps)
    with pytest.raises(IncompatiblePartition):
        quotient_presheaf(F, {"c1": [["x", "y"]], "c0": [["u"], ["v"]]})


# --- hom sheaves ----------------------------------------------------------------------------------


def test_hom_sheaf_with_singleton_target():
    osa = from_topology(["a", "b"], [frozenset(), frozenset({"a"}), frozenset({"a", "b"})])
    G = inclusion_cosheaf(osa)
    H = hom_sheaf(G, FinSet(("z",)))
    for x in osa.algebra.elements:
        assert len(H.sets[x]) == 1


def test_hom_sheaf_two_colorings_of_sierpinski():
    osa = from_topology(["a", "b"], [frozenset(), frozenset({"a"}), frozenset({"a", "b"})])
    G = inclusion_cosheaf(osa)
    H = hom_sheaf(G, FinSet(("0", "1")))
    assert is_sheaf(H).ok
    assert len(H.sets["{}"]) == 1  # the empty map
    assert len(H.sets["{a}"]) == 2
    assert len(H.sets["{a,b}"]) == 4


def test_hom_sheaf_empty_target():
    osa = from_topology(["a", "b"], [frozenset(), frozenset({"a"}), frozenset({"a", "b"})])
    G = inclusion_cosheaf(osa)
    H = hom_sheaf(G, FinSet(()))
    assert len(H.sets["{}"]) == 1
    assert len(H.sets["{a}"]) == 0


# --- the T copresheaf ------------------------------------------------------------------------------


def test_t_copresheaf_is_cosheaf_on_corpus():
    for opens in corpus_topologies(3):
        alg = from_topology(["a", "b", "c"], opens).algebra
        rep, T = set_representation_copresheaf(alg)
        assert is_cosheaf(T).ok


def test_t_nat_of_identity_hom():
    alg = sierpinski_algebra()
    nat = t_nat_of_hom(identity_hom(alg))
    for x in alg.elements:
        assert nat.components[x].is_bijective()
