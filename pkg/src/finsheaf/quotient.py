"""Quotient categories via compatible partitions and cochain groups.

A relation is a pair of partitions (objects, morphisms).  Preservation of
dom/cod, identities and composition is checked exhaustively; feasibility (every
chainable pair of morphism classes has composable representatives) is a
separate axiom, because composition-preservation is vacuous on class pairs
without composable representatives.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FinsheafError
from .fincat import (
    FiniteCategory,
    FunctorTable,
    Violation,
    full_subcategory,
    functor_predicates,
    morphism_predicates,
    validate_category,
)


class NotAPartition(FinsheafError):
    pass


class NotCategorical(FinsheafError):
    pass


class NotStronglyIso(FinsheafError):
    pass


class GeneratorNotIso(FinsheafError):
    pass


class CochainConditionViolated(FinsheafError):
    pass


def _check_partition(universe, classes, what):
    seen = set()
    for cls in classes:
        if not cls:
            raise NotAPartition("empty %s class" % what)
        for x in cls:
            if x in seen:
                raise NotAPartition("%s %r in two classes" % (what, x))
            if x not in universe:
                raise NotAPartition("unknown %s %r" % (what, x))
            seen.add(x)
    if seen != set(universe):
        raise NotAPartition("%s classes do not cover" % what)


@dataclass(frozen=True)
class CatRelation:
    base: FiniteCategory
    ob_classes: tuple  # tuple of frozensets
    mor_classes: tuple

    def __post_init__(self):
        object.__setattr__(self, "ob_classes", tuple(frozenset(c) for c in self.ob_classes))
        object.__setattr__(self, "mor_classes", tuple(frozenset(c) for c in self.mor_classes))
        _check_partition(self.base.objects, self.ob_classes, "object")
        _check_partition(self.base.morphisms, self.mor_classes, "morphism")
        object.__setattr__(self, "_ob_of", {x: c for c in self.ob_classes for x in c})
        object.__setattr__(self, "_mor_of", {x: c for c in self.mor_classes for x in c})

    def ob_class(self, a):
        return self._ob_of[a]

    def mor_class(self, f):
        return self._mor_of[f]


@dataclass(frozen=True)
class RelationReport:
    domcod_ok: bool
    id_ok: bool
    comp_ok: bool
    feasible: bool
    violations: tuple

    @property
    def precategorical(self):
        return self.domcod_ok and self.id_ok and self.comp_ok

    @property
    def categorical(self):
        return self.precategorical and self.feasible

    def classification(self):
        if self.categorical:
            return "categorical"
        if self.precategorical:
            return "precategorical"
        return "not precategorical"


def check_relation(relation):
    """Classify a relation, checking each preservation condition exhaustively."""
    base = relation.base
    violations = []
    domcod_ok = True
    for cls in relation.mor_classes:
        doms = {relation.ob_class(base.dom[f]) for f in cls}
        cods = {relation.ob_class(base.cod[f]) for f in cls}
        if len(doms) > 1 or len(cods) > 1:
            domcod_ok = False
            violations.append(Violation("DomCodNotPreserved", (tuple(sorted(cls)),)))
    id_ok = True
    for cls in relation.ob_classes:
        ids = {relation.mor_class(base.identity_of(a)) for a in cls}
        if len(ids) > 1:
            id_ok = False
            violations.append(Violation("IdNotPreserved", (tuple(sorted(cls)),)))
    comp_ok = True
    feasible = True
    if domcod_ok:
        for cf in relation.mor_classes:
            for cg in relation.mor_classes:
                f0 = next(iter(cf))
                g0 = next(iter(cg))
                # only chainable class pairs can have composable members
                if relation.ob_class(base.cod[f0]) != relation.ob_class(base.dom[g0]):
                    continue
                targets = {
                    relation.mor_class(base.compose(g, f))
                    for f in cf
                    for g in cg
                    if base.cod[f] == base.dom[g]
                }
                if len(targets) > 1:
                    comp_ok = False
                    violations.append(
                        Violation(
                            "CompNotPreserved",
                            (tuple(sorted(cf)), tuple(sorted(cg))),
                        )
                    )
                if len(targets) == 0:
                    feasible = False
                    violations.append(
                        Violation(
                            "NotFeasible",
                            (tuple(sorted(cf)), tuple(sorted(cg))),
                        )
                    )
    return RelationReport(domcod_ok, id_ok, comp_ok, feasible, tuple(violations))


def _class_name(cls, order):
    least = min(cls, key=lambda x: order.index(x))
    return "[%s]" % least


def quotient_category(relation):
    """The quotient of the base by a categorical relation, with its projection.

    Objects and morphisms are the classes, named by least member; composition
    is computed from any composable pair of representatives (feasibility makes
    one exist, comp-preservation makes the answer class unique).
    """
    report = check_relation(relation)
    if not report.categorical:
        raise NotCategorical(
            "relation is %s" % report.classification(),
        )
    base = relation.base
    ob_order = list(base.objects)
    mor_order = list(base.morphisms)
    ob_name = {cls: _class_name(cls, ob_order) for cls in relation.ob_classes}
    mor_name = {cls: _class_name(cls, mor_order) for cls in relation.mor_classes}
    objects = [ob_name[c] for c in relation.ob_classes]
    morphisms = []
    for cls in relation.mor_classes:
        f0 = next(iter(cls))
        morphisms.append(
            (
                mor_name[cls],
                ob_name[relation.ob_class(base.dom[f0])],
                ob_name[relation.ob_class(base.cod[f0])],
            )
        )
    identities = {}
    for cls in relation.ob_classes:
        a = next(iter(cls))
        identities[ob_name[cls]] = mor_name[relation.mor_class(base.identity_of(a))]
    comp = {}
    for cf in relation.mor_classes:
        for cg in relation.mor_classes:
            pairs = [
                (g, f) for f in cf for g in cg if base.cod[f] == base.dom[g]
            ]
            if pairs:
                g, f = pairs[0]
                comp[(mor_name[cg], mor_name[cf])] = mor_name[
                    relation.mor_class(base.compose(g, f))
                ]
    quotient = validate_category(objects, morphisms, identities, comp)
    projection = FunctorTable(
        base, quotient,
        {a: ob_name[relation.ob_class(a)] for a in base.objects},
        {f: mor_name[relation.mor_class(f)] for f in base.morphisms},
    )
    if not functor_predicates(projection)["surjective"]:
        raise FinsheafError("projection is not a surjective functor")
    return quotient, projection


def relation_from_functor(F):
    """The relation identifying whatever F identifies."""
    ob_groups = {}
    for a in F.src.objects:
        ob_groups.setdefault(F.ob_map[a], []).append(a)
    mor_groups = {}
    for f in F.src.morphisms:
        mor_groups.setdefault(F.mor_map[f], []).append(f)
    return CatRelation(
        F.src,
        tuple(frozenset(v) for v in ob_groups.values()),
        tuple(frozenset(v) for v in mor_groups.values()),
    )


def refines(relation, other):
    """True when every class of `relation` sits inside a class of `other`."""
    for cls in relation.ob_classes:
        targets = {other.ob_class(a) for a in cls}
        if len(targets) > 1:
            return False
    for cls in relation.mor_classes:
        targets = {other.mor_class(f) for f in cls}
        if len(targets) > 1:
            return False
    return True


def factor_through_quotient(F, relation):
    """Unique functor out of the quotient with rho . projection == F.

    Requires `relation` to refine the relation induced by F.
    """
    if not refines(relation, relation_from_functor(F)):
        raise FinsheafError("functor does not respect the relation")
    quotient, projection = quotient_category(relation)
    ob_map = {}
    for a in F.src.objects:
        ob_map[projection.ob_map[a]] = F.ob_map[a]
    mor_map = {}
    for f in F.src.morphisms:
        mor_map[projection.mor_map[f]] = F.mor_map[f]
    rho = FunctorTable(quotient, F.dst, ob_map, mor_map)
    return quotient, projection, rho


# --- cochain groups --------------------------------------------------------------------


@dataclass(frozen=True)
class CochainGroup:
    """A coherent family of isomorphisms inside one object class."""

    base: FiniteCategory
    members: tuple
    isos: dict  # (A, B) -> morphism A -> B

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        base = self.base
        for a in self.members:
            for b in self.members:
                f = self.isos.get((a, b))
                if f is None or base.dom[f] != a or base.cod[f] != b:
                    raise CochainConditionViolated("missing iso %s -> %s" % (a, b))
        for a in self.members:
            if self.isos[(a, a)] != base.identity_of(a):
                raise CochainConditionViolated("self iso at %s is not the identity" % a)
        for a in self.members:
            for b in self.members:
                if base.compose(self.isos[(b, a)], self.isos[(a, b)]) != base.identity_of(a):
                    raise CochainConditionViolated("inverse law fails at (%s, %s)" % (a, b))
        for a in self.members:
            for b in self.members:
                for c in self.members:
                    lhs = base.compose(
                        self.isos[(c, a)],
                        base.compose(self.isos[(b, c)], self.isos[(a, b)]),
                    )
                    if lhs != base.identity_of(a):
                        raise CochainConditionViolated(
                            "triangle fails at (%s, %s, %s)" % (a, b, c)
                        )

    def iso(self, a, b):
        return self.isos[(a, b)]


def span_cochain(base, members, representative, generators):
    """Span a cochain group from one iso out of the representative per member.

    phi_{B,C} = gen_C . gen_B^{-1}; the generator of the representative itself
    is its identity.
    """
    members = tuple(members)
    if representative not in members:
        raise FinsheafError("representative must belong to the class")
    gens = dict(generators)
    gens[representative] = base.identity_of(representative)
    inverses = {}
    for b in members:
        g = gens.get(b)
        if g is None or base.dom[g] != representative or base.cod[g] != b:
            raise GeneratorNotIso("generator for %s missing or misdirected" % b)
        candidates = [
            h for h in base.hom(b, representative)
            if base.compose(h, g) == base.identity_of(representative)
            and base.compose(g, h) == base.identity_of(b)
        ]
        if not candidates:
            raise GeneratorNotIso("generator for %s is not an isomorphism" % b)
        inverses[b] = candidates[0]
    isos = {}
    for a in members:
        for b in members:
            isos[(a, b)] = base.compose(gens[b], inverses[a])
    return CochainGroup(base, members, isos)


def relation_from_cochain(base, ob_classes, cochains):
    """Morphism classes from a choice of cochain groups: f ~ g when conjugating
    f by the chosen isos lands exactly on g.  Classes are computed by mapping
    every morphism to its normal form at the representatives."""
    ob_classes = tuple(frozenset(c) for c in ob_classes)
    _check_partition(base.objects, ob_classes, "object")
    by_class = {}
    for cls in ob_classes:
        group = cochains.get(cls)
        if group is None:
            # also accept keys by least member for file-format convenience
            least = min(cls, key=lambda x: base.objects.index(x))
            group = cochains.get(least)
        if group is None:
            raise FinsheafError("no cochain group for class %r" % (sorted(cls),))
        if set(group.members) != set(cls):
            raise NotStronglyIso("cochain group members differ from the class")
        by_class[cls] = group
    ob_of = {a: c for c in ob_classes for a in c}
    rep = {
        cls: min(cls, key=lambda x: base.objects.index(x)) for cls in ob_classes
    }
    groups = {}
    for f in base.morphisms:
        dc, cc = ob_of[base.dom[f]], ob_of[base.cod[f]]
        # normal form: transport f to the representatives
        to_rep = by_class[cc].iso(base.cod[f], rep[cc])
        from_rep = by_class[dc].iso(rep[dc], base.dom[f])
        normal = base.compose(to_rep, base.compose(f, from_rep))
        groups.setdefault(normal, []).append(f)
    relation = CatRelation(
        base, ob_classes, tuple(frozenset(v) for v in groups.values())
    )
    report = check_relation(relation)
    if not report.categorical:
        raise NotCategorical("cochain relation failed to be categorical")
    return relation


def quotient_is_fully_faithful(base, relation, projection, quotient):
    """Each hom-class restriction of the projection must biject."""
    for a in base.objects:
        for b in base.objects:
            src = base.hom(a, b)
            images = [projection.mor_map[f] for f in src]
            target = quotient.hom(projection.ob_map[a], projection.ob_map[b])
            if len(set(images)) != len(images):
                return False
            if set(images) != set(target):
                return False
    return True


@dataclass(frozen=True)
class SketchResult:
    category: FiniteCategory
    quotient: FiniteCategory
    projection: FunctorTable
    to_quotient: FunctorTable
    from_quotient: FunctorTable


def sketch(base, ob_classes, representatives=None, cochains=None):
    """Full subcategory on chosen representatives, with the isomorphism onto a
    cochain quotient built and verified in both directions."""
    ob_classes = tuple(frozenset(c) for c in ob_classes)
    _check_partition(base.objects, ob_classes, "object")
    if representatives is None:
        representatives = {
            cls: min(cls, key=lambda x: base.objects.index(x)) for cls in ob_classes
        }
    else:
        chosen = dict(representatives)
        representatives = {}
        for cls in ob_classes:
            rep = chosen.get(cls)
            if rep is None:
                rep = chosen.get(min(cls, key=lambda x: base.objects.index(x)))
            if rep is None or rep not in cls:
                raise FinsheafError("bad representative choice for %r" % (sorted(cls),))
            representatives[cls] = rep
    if cochains is None:
        cochains = {}
        for cls in ob_classes:
            rep = representatives[cls]
            gens = {}
            for b in sorted(cls, key=lambda x: base.objects.index(x)):
                if b == rep:
                    continue
                iso = next(
                    (
                        f for f in base.hom(rep, b)
                        if morphism_predicates(base, f)["is_iso"]
                    ),
                    None,
                )
                if iso is None:
                    raise NotStronglyIso("%s and %s are not isomorphic" % (rep, b))
                gens[b] = iso
            cochains[cls] = span_cochain(base, tuple(sorted(cls, key=lambda x: base.objects.index(x))), rep, gens)
    relation = relation_from_cochain(base, ob_classes, cochains)
    quotient, projection = quotient_category(relation)
    sub = full_subcategory(base, [representatives[c] for c in ob_classes])
    to_quotient = FunctorTable(
        sub, quotient,
        {a: projection.ob_map[a] for a in sub.objects},
        {f: projection.mor_map[f] for f in sub.morphisms},
    )
    # inverse: send each class to its representative datum
    ob_back = {}
    for cls in ob_classes:
        ob_back[projection.ob_map[representatives[cls]]] = representatives[cls]
    mor_back = {}
    for f in sub.morphisms:
        mor_back[projection.mor_map[f]] = f
    if len(mor_back) != len(quotient.morphisms):
        raise FinsheafError("sketch does not exhaust the quotient morphisms")
    from_quotient = FunctorTable(quotient, sub, ob_back, mor_back)
    # both round trips must be identities
    for a in sub.objects:
        if from_quotient.ob_map[to_quotient.ob_map[a]] != a:
            raise FinsheafError("sketch round trip broken on objects")
    for f in sub.morphisms:
        if from_quotient.mor_map[to_quotient.mor_map[f]] != f:
            raise FinsheafError("sketch round trip broken on morphisms")
    for a in quotient.objects:
        if to_quotient.ob_map[from_quotient.ob_map[a]] != a:
            raise FinsheafError("quotient round trip broken on objects")
    for f in quotient.morphisms:
        if to_quotient.mor_map[from_quotient.mor_map[f]] != f:
            raise FinsheafError("quotient round trip broken on morphisms")
    return SketchResult(sub, quotient, projection, to_quotient, from_quotient)


def categories_isomorphic(c, d):
    """Search for an isomorphism of categories; exhaustive, test-scale only."""
    from .fincat import enumerate_functors

    if len(c.objects) != len(d.objects) or len(c.morphisms) != len(d.morphisms):
        return False
    for F in enumerate_functors(c, d):
        ob_values = set(F.ob_map.values())
        mor_values = set(F.mor_map.values())
        if len(ob_values) == len(d.objects) and len(mor_values) == len(d.morphisms):
            return True
    return False
