"""Finite categories as explicit validated tables.

Objects and morphisms are opaque string ids; all equality is id equality.  The
composition table is stored sparsely keyed by (g, f), absence meaning the pair
is not composable.  Validation re-derives every axiom instance by brute force
and reports the full violation list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

from .errors import FinsheafError, ValidationFailure
from .finset import FinSet, FinSetMap


class InvalidCategory(ValidationFailure):
    pass


class InvalidFunctor(ValidationFailure):
    pass


class NaturalityViolation(ValidationFailure):
    pass


class UnknownMorphism(FinsheafError):
    pass


class InvalidSubcategory(FinsheafError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    items: tuple

    def __str__(self):
        return "%s%r" % (self.kind, self.items)


@dataclass(frozen=True)
class FiniteCategory:
    objects: tuple
    morphisms: tuple
    dom: dict
    cod: dict
    identities: dict
    comp: dict

    def __post_init__(self):
        hom = {}
        for f in self.morphisms:
            hom.setdefault((self.dom[f], self.cod[f]), []).append(f)
        object.__setattr__(self, "_hom", {k: tuple(v) for k, v in hom.items()})

    def hom(self, a, b):
        return self._hom.get((a, b), ())

    def identity_of(self, a):
        return self.identities[a]

    def is_identity(self, f):
        return self.identities.get(self.dom[f]) == f and self.dom[f] == self.cod[f]

    def compose(self, g, f):
        """g after f; raises if the pair is not composable."""
        try:
            return self.comp[(g, f)]
        except KeyError:
            raise UnknownMorphism("no composite for (%s, %s)" % (g, f)) from None

    def composable(self, g, f):
        return self.cod[f] == self.dom[g]

    def has_morphism(self, f):
        return f in self.dom

    def opposite(self):
        """Table reversal: same ids, dom/cod swapped, comp transposed."""
        return FiniteCategory(
            objects=self.objects,
            morphisms=self.morphisms,
            dom=dict(self.cod),
            cod=dict(self.dom),
            identities=dict(self.identities),
            comp={(f, g): h for (g, f), h in self.comp.items()},
        )


def check_category_tables(objects, morphisms, identities, comp):
    """Collect every axiom violation of the raw tables.

    `morphisms` is a list of (id, dom, cod) triples.  Returns a violation list;
    empty means the tables form a category.
    """
    violations = []
    objects = list(objects)
    if len(set(objects)) != len(objects):
        violations.append(Violation("DuplicateObject", (tuple(objects),)))
    ids = [m[0] for m in morphisms]
    if len(set(ids)) != len(ids):
        violations.append(Violation("DuplicateMorphism", (tuple(ids),)))
    dom = {m[0]: m[1] for m in morphisms}
    cod = {m[0]: m[2] for m in morphisms}
    obset = set(objects)
    for f, d, c in morphisms:
        if d not in obset or c not in obset:
            violations.append(Violation("BadDomCod", (f, d, c)))
    if violations:
        return violations

    for a in objects:
        i = identities.get(a)
        if i is None or i not in dom or dom[i] != a or cod[i] != a:
            violations.append(Violation("MissingIdentity", (a,)))
    for (g, f), h in comp.items():
        if f not in dom or g not in dom or h not in dom:
            violations.append(Violation("BadDomCod", (g, f)))
            continue
        if cod[f] != dom[g]:
            violations.append(Violation("BadDomCod", (g, f)))
        elif dom[h] != dom[f] or cod[h] != cod[g]:
            violations.append(Violation("BadDomCod", (g, f)))
    for f in ids:
        for g in ids:
            if cod[f] == dom[g] and (g, f) not in comp:
                violations.append(Violation("BadDomCod", (g, f, "missing composite")))
    if violations:
        return violations

    for a in objects:
        i = identities[a]
        for f in ids:
            if dom[f] == a and comp[(f, i)] != f:
                violations.append(Violation("MissingIdentity", (a, f, "right unit")))
            if cod[f] == a and comp[(i, f)] != f:
                violations.append(Violation("MissingIdentity", (a, f, "left unit")))
    for g, f in list(comp):
        gf = comp[(g, f)]
        for h in ids:
            if cod[g] == dom[h]:
                if comp[(comp[(h, g)], f)] != comp[(h, gf)]:
                    violations.append(Violation("NonAssociative", (h, g, f)))
    return violations


def validate_category(objects, morphisms, identities, comp):
    """Build a FiniteCategory after exhaustively re-deriving all axioms."""
    violations = check_category_tables(objects, morphisms, identities, comp)
    if violations:
        raise InvalidCategory("invalid category tables", violations)
    return FiniteCategory(
        objects=tuple(objects),
        morphisms=tuple(m[0] for m in morphisms),
        dom={m[0]: m[1] for m in morphisms},
        cod={m[0]: m[2] for m in morphisms},
        identities=dict(identities),
        comp=dict(comp),
    )


# --- builders -----------------------------------------------------------------


def discrete_category(objects):
    objects = list(objects)
    morphisms = [("id_%s" % a, a, a) for a in objects]
    identities = {a: "id_%s" % a for a in objects}
    comp = {(i, i): i for _, i in identities.items()}
    return validate_category(objects, morphisms, identities, comp)


def single_category(name="A"):
    return discrete_category([name])


def poset_category(elements, leq):
    """Category of a poset: one morphism a->b per related pair, ids included.

    `leq` is any iterable of (a, b) pairs; reflexivity is added, transitivity
    must already hold (validation will catch missing composites).
    """
    elements = list(elements)
    rel = set(leq) | {(a, a) for a in elements}
    morphisms = [("%s<=%s" % (a, b), a, b) for a in elements for b in elements if (a, b) in rel]
    identities = {a: "%s<=%s" % (a, a) for a in elements}
    comp = {}
    for a, b in rel:
        for b2, c in rel:
            if b == b2 and (a, c) in rel:
                comp[("%s<=%s" % (b, c), "%s<=%s" % (a, b))] = "%s<=%s" % (a, c)
    return validate_category(elements, morphisms, identities, comp)


def parallel_pair_category():
    """Two objects with a parallel pair of arrows between them."""
    morphisms = [("id_A", "A", "A"), ("id_B", "B", "B"), ("f1", "A", "B"), ("f2", "A", "B")]
    comp = {
        ("id_A", "id_A"): "id_A",
        ("id_B", "id_B"): "id_B",
        ("f1", "id_A"): "f1",
        ("f2", "id_A"): "f2",
        ("id_B", "f1"): "f1",
        ("id_B", "f2"): "f2",
    }
    return validate_category(["A", "B"], morphisms, {"A": "id_A", "B": "id_B"}, comp)


def monoid_category(name, elements, op, unit):
    """One-object category whose morphisms are the monoid elements."""
    morphisms = [(e, name, name) for e in elements]
    comp = {(g, f): op(g, f) for g in elements for f in elements}
    return validate_category([name], morphisms, {name: unit}, comp)


# --- predicates ---------------------------------------------------------------


def morphism_predicates(cat, f):
    """Exhaustive mono/epi/iso flags for one morphism."""
    if not cat.has_morphism(f):
        raise UnknownMorphism(f)
    a, b = cat.dom[f], cat.cod[f]
    is_mono = True
    for w in cat.objects:
        arrows = cat.hom(w, a)
        for g in arrows:
            for h in arrows:
                if g != h and cat.compose(f, g) == cat.compose(f, h):
                    is_mono = False
    is_epi = True
    for w in cat.objects:
        arrows = cat.hom(b, w)
        for g in arrows:
            for h in arrows:
                if g != h and cat.compose(g, f) == cat.compose(h, f):
                    is_epi = False
    is_iso = any(
        cat.compose(g, f) == cat.identity_of(a) and cat.compose(f, g) == cat.identity_of(b)
        for g in cat.hom(b, a)
    )
    return {"is_mono": is_mono, "is_epi": is_epi, "is_iso": is_iso}


def are_isomorphic_objects(cat, a, b):
    return a == b or any(
        morphism_predicates(cat, f)["is_iso"] for f in cat.hom(a, b)
    )


def find_initial_terminal(cat):
    """Initial/terminal object lists, with mutual-isomorphism re-verified."""
    initials = [a for a in cat.objects if all(len(cat.hom(a, b)) == 1 for b in cat.objects)]
    terminals = [a for a in cat.objects if all(len(cat.hom(b, a)) == 1 for b in cat.objects)]
    for group in (initials, terminals):
        for a in group:
            for b in group:
                if not are_isomorphic_objects(cat, a, b):
                    raise FinsheafError(
                        "uniqueness up to isomorphism failed for %s, %s" % (a, b)
                    )
    return {"initials": initials, "terminals": terminals}


# --- functors and nats ----------------------------------------------------------


@dataclass(frozen=True)
class FunctorTable:
    src: FiniteCategory
    dst: FiniteCategory
    ob_map: dict
    mor_map: dict

    def __post_init__(self):
        violations = []
        for a in self.src.objects:
            if self.ob_map.get(a) not in self.dst.objects:
                violations.append(Violation("ObMapGap", (a,)))
        for f in self.src.morphisms:
            ff = self.mor_map.get(f)
            if ff is None or not self.dst.has_morphism(ff):
                violations.append(Violation("MorMapGap", (f,)))
        if violations:
            raise InvalidFunctor("functor tables incomplete", violations)
        for f in self.src.morphisms:
            ff = self.mor_map[f]
            if self.dst.dom[ff] != self.ob_map[self.src.dom[f]] or self.dst.cod[ff] != self.ob_map[self.src.cod[f]]:
                violations.append(Violation("DomCodNotPreserved", (f,)))
        for a in self.src.objects:
            if self.mor_map[self.src.identity_of(a)] != self.dst.identity_of(self.ob_map[a]):
                violations.append(Violation("IdentityNotPreserved", (a,)))
        for (g, f), h in self.src.comp.items():
            if self.dst.comp.get((self.mor_map[g], self.mor_map[f])) != self.mor_map[h]:
                violations.append(Violation("CompositionNotPreserved", (g, f)))
        if violations:
            raise InvalidFunctor("functor axioms violated", violations)

    def on_ob(self, a):
        return self.ob_map[a]

    def on_mor(self, f):
        return self.mor_map[f]


def identity_functor(cat):
    return FunctorTable(cat, cat, {a: a for a in cat.objects}, {f: f for f in cat.morphisms})


def compose_functors(g, f):
    """g after f."""
    if f.dst is not g.src and f.dst != g.src:
        raise InvalidFunctor("functors not composable")
    return FunctorTable(
        f.src,
        g.dst,
        {a: g.ob_map[f.ob_map[a]] for a in f.src.objects},
        {m: g.mor_map[f.mor_map[m]] for m in f.src.morphisms},
    )


def functors_equal(f, g):
    return f.ob_map == g.ob_map and f.mor_map == g.mor_map


@dataclass(frozen=True)
class NatTable:
    F: FunctorTable
    G: FunctorTable
    components: dict

    def __post_init__(self):
        F, G = self.F, self.G
        if F.src is not G.src and F.src != G.src:
            raise NaturalityViolation("parallel functors required")
        if F.dst is not G.dst and F.dst != G.dst:
            raise NaturalityViolation("parallel functors required")
        dst = F.dst
        violations = []
        for a in F.src.objects:
            c = self.components.get(a)
            if c is None or not dst.has_morphism(c):
                violations.append(Violation("ComponentGap", (a,)))
                continue
            if dst.dom[c] != F.ob_map[a] or dst.cod[c] != G.ob_map[a]:
                violations.append(Violation("ComponentEndpoints", (a,)))
        if violations:
            raise NaturalityViolation("bad components", violations)
        for f in F.src.morphisms:
            a, b = F.src.dom[f], F.src.cod[f]
            if dst.compose(G.mor_map[f], self.components[a]) != dst.compose(self.components[b], F.mor_map[f]):
                violations.append(Violation("NaturalitySquare", (f,)))
        if violations:
            raise NaturalityViolation("naturality fails", violations)

    def at(self, a):
        return self.components[a]


def identity_nat(F):
    return NatTable(F, F, {a: F.dst.identity_of(F.ob_map[a]) for a in F.src.objects})


def vertical_compose(beta, alpha):
    """(beta . alpha)(A) = beta(A) . alpha(A); needs alpha: F->G, beta: G->H."""
    if not functors_equal(alpha.G, beta.F):
        raise NaturalityViolation("vertical composition needs matching middle functor")
    dst = alpha.F.dst
    return NatTable(
        alpha.F,
        beta.G,
        {a: dst.compose(beta.components[a], alpha.components[a]) for a in alpha.F.src.objects},
    )


# --- Mor-categories -------------------------------------------------------------


@dataclass(frozen=True)
class Square:
    """A morphism of the Mor-category: (phi, psi): f -> g with psi.f == g.phi."""

    phi: str
    psi: str
    src: str
    dst: str


@dataclass(frozen=True)
class MorCategory:
    base: FiniteCategory
    category: FiniteCategory
    squares: dict  # square id -> Square
    square_ids: dict  # (phi, psi, src f, dst g) -> square id

    def square_id(self, phi, psi, f, g):
        return self.square_ids[(phi, psi, f, g)]


def mor_category(cat):
    """Objects are the morphisms of `cat`; morphisms f -> g are the commuting
    squares (phi, psi) with psi.f == g.phi, found by exhaustive search."""
    squares = {}
    square_ids = {}
    order = []
    for f in cat.morphisms:
        for g in cat.morphisms:
            for phi in cat.hom(cat.dom[f], cat.dom[g]):
                for psi in cat.hom(cat.cod[f], cat.cod[g]):
                    if cat.compose(psi, f) == cat.compose(g, phi):
                        sid = "sq%d" % len(order)
                        squares[sid] = Square(phi, psi, f, g)
                        square_ids[(phi, psi, f, g)] = sid
                        order.append(sid)
    morphisms = [(sid, squares[sid].src, squares[sid].dst) for sid in order]
    identities = {
        f: square_ids[(cat.identity_of(cat.dom[f]), cat.identity_of(cat.cod[f]), f, f)]
        for f in cat.morphisms
    }
    comp = {}
    by_src = {}
    for sid in order:
        by_src.setdefault(squares[sid].src, []).append(sid)
    for s1 in order:
        q1 = squares[s1]
        for s2 in by_src.get(q1.dst, ()):
            q2 = squares[s2]
            comp[(s2, s1)] = square_ids[
                (cat.compose(q2.phi, q1.phi), cat.compose(q2.psi, q1.psi), q1.src, q2.dst)
            ]
    category = validate_category(list(cat.morphisms), morphisms, identities, comp)
    return MorCategory(cat, category, squares, square_ids)


def mor_functor_lift(F, mc_src, mc_dst):
    """Promote F: C -> D to Mor(C) -> Mor(D), squares mapped componentwise."""
    ob_map = {f: F.mor_map[f] for f in F.src.morphisms}
    mor_map = {}
    for sid, sq in mc_src.squares.items():
        mor_map[sid] = mc_dst.square_id(
            F.mor_map[sq.phi], F.mor_map[sq.psi], F.mor_map[sq.src], F.mor_map[sq.dst]
        )
    return FunctorTable(mc_src.category, mc_dst.category, ob_map, mor_map)


@dataclass(frozen=True)
class CanonicalFunctors:
    dom_functor: FunctorTable
    cod_functor: FunctorTable
    id_functor: FunctorTable
    comp_ob: dict  # (f, g) composable pair of base morphisms -> g.f
    comp_mor: dict  # (square f->f', square g->g') with matching middle -> square


def canonical_functors(cat, mc):
    """Dom/Cod/Id plus the partial composition functor of the Mor-category."""
    dom_f = FunctorTable(
        mc.category, cat,
        {f: cat.dom[f] for f in cat.morphisms},
        {sid: sq.phi for sid, sq in mc.squares.items()},
    )
    cod_f = FunctorTable(
        mc.category, cat,
        {f: cat.cod[f] for f in cat.morphisms},
        {sid: sq.psi for sid, sq in mc.squares.items()},
    )
    id_f = FunctorTable(
        cat, mc.category,
        {a: cat.identity_of(a) for a in cat.objects},
        {f: mc.square_id(f, f, cat.identity_of(cat.dom[f]), cat.identity_of(cat.cod[f]))
         for f in cat.morphisms},
    )
    if not functors_equal(compose_functors(dom_f, id_f), identity_functor(cat)):
        raise FinsheafError("Dom . Id is not the identity functor")
    if not functors_equal(compose_functors(cod_f, id_f), identity_functor(cat)):
        raise FinsheafError("Cod . Id is not the identity functor")
    comp_ob = {(f, g): h for (g, f), h in cat.comp.items()}
    comp_mor = {}
    for s1, q1 in mc.squares.items():
        for s2, q2 in mc.squares.items():
            # (phi,psi): f -> f' and (psi2,chi): g -> g' compose to (phi,chi)
            # exactly when psi == psi2 and the object pairs are composable
            if q1.psi == q2.phi and cat.composable(q2.src, q1.src) and cat.composable(q2.dst, q1.dst):
                comp_mor[(s1, s2)] = mc.square_id(
                    q1.phi, q2.psi,
                    cat.compose(q2.src, q1.src), cat.compose(q2.dst, q1.dst),
                )
    return CanonicalFunctors(dom_f, cod_f, id_f, comp_ob, comp_mor)


def diagonal_plane_functor(cat, mc, mc2):
    """Mor^2(C) -> Mor(C): a square (phi, psi): f -> g maps to its diagonal
    psi.f == g.phi; a morphism of squares ((i, m), (k, n)) maps to (i, n)."""
    ob_map = {}
    for sid, sq in mc.squares.items():
        diag = cat.compose(sq.psi, sq.src)
        ob_map[sid] = diag
    mor_map = {}
    for sid2, sq2 in mc2.squares.items():
        u = mc.squares[sq2.phi]  # (i, m): f -> f'
        v = mc.squares[sq2.psi]  # (k, n): g -> g'
        src_diag = ob_map[sq2.src]
        dst_diag = ob_map[sq2.dst]
        mor_map[sid2] = mc.square_id(u.phi, v.psi, src_diag, dst_diag)
    return FunctorTable(mc2.category, mc.category, ob_map, mor_map)


def nat_as_functor(alpha, mc_dst):
    """The functor C -> Mor(D) induced by a nat, with Dom/Cod recovering F/G."""
    F, G = alpha.F, alpha.G
    ob_map = {a: alpha.components[a] for a in F.src.objects}
    mor_map = {
        f: mc_dst.square_id(
            F.mor_map[f], G.mor_map[f], alpha.components[F.src.dom[f]], alpha.components[F.src.cod[f]]
        )
        for f in F.src.morphisms
    }
    functor = FunctorTable(F.src, mc_dst.category, ob_map, mor_map)
    cf = canonical_functors(F.dst, mc_dst)
    if not functors_equal(compose_functors(cf.dom_functor, functor), F):
        raise FinsheafError("Dom . nat-functor differs from F")
    if not functors_equal(compose_functors(cf.cod_functor, functor), G):
        raise FinsheafError("Cod . nat-functor differs from G")
    return functor


def horizontal_compose(beta, alpha, cross_check=True):
    """Horizontal product of alpha: F -> G (C -> D) and beta: H -> K (D -> E).

    Computed componentwise as beta(G A) . H(alpha A); when `cross_check` is on,
    recomputed through the diagonal-plane route (nat-as-functor, lifted beta,
    then the diagonal) and compared.
    """
    F, G = alpha.F, alpha.G
    H, K = beta.F, beta.G
    E = H.dst
    components = {
        a: E.compose(beta.components[G.ob_map[a]], H.mor_map[alpha.components[a]])
        for a in F.src.objects
    }
    # the other factorization must agree
    for a in F.src.objects:
        other = E.compose(K.mor_map[alpha.components[a]], beta.components[F.ob_map[a]])
        if components[a] != other:
            raise NaturalityViolation("horizontal composite factorizations differ at %s" % a)
    result = NatTable(compose_functors(H, F), compose_functors(K, G), components)
    if cross_check:
        mc_d = mor_category(H.src)
        mc_e = mor_category(E)
        mc_e2 = mor_category(mc_e.category)
        alpha_hat = nat_as_functor(alpha, mc_d)
        beta_hat = nat_as_functor(beta, mc_e)
        lifted = mor_functor_lift(beta_hat, mc_d, mc_e2)
        dp = diagonal_plane_functor(E, mc_e, mc_e2)
        via_dp = compose_functors(dp, compose_functors(lifted, alpha_hat))
        for a in F.src.objects:
            if via_dp.ob_map[a] != components[a]:
                raise NaturalityViolation("diagonal-plane route disagrees at %s" % a)
    return result


# --- hom functors ----------------------------------------------------------------


@dataclass(frozen=True)
class SetFunctor:
    """A set-valued functor given by explicit FinSet/FinSetMap tables."""

    cat: FiniteCategory
    sets: dict
    maps: dict

    def __post_init__(self):
        violations = []
        for a in self.cat.objects:
            if a not in self.sets:
                violations.append(Violation("SetGap", (a,)))
        for f in self.cat.morphisms:
            m = self.maps.get(f)
            if m is None:
                violations.append(Violation("MapGap", (f,)))
                continue
            if m.dom != self.sets[self.cat.dom[f]] or m.cod != self.sets[self.cat.cod[f]]:
                violations.append(Violation("MapEndpoints", (f,)))
        if violations:
            raise InvalidFunctor("set functor tables incomplete", violations)
        for a in self.cat.objects:
            i = self.cat.identity_of(a)
            if self.maps[i].table != {x: x for x in self.sets[a]}:
                violations.append(Violation("IdentityNotPreserved", (a,)))
        for (g, f), h in self.cat.comp.items():
            if self.maps[g].compose(self.maps[f]).table != self.maps[h].table:
                violations.append(Violation("CompositionNotPreserved", (g, f)))
        if violations:
            raise InvalidFunctor("set functor axioms violated", violations)

    def set_at(self, a):
        return self.sets[a]

    def map_at(self, f):
        return self.maps[f]


def hom_functor(cat, a, variance="covariant"):
    """Hom(a, -) as a SetFunctor on cat, or Hom(-, a) on the opposite category."""
    if variance == "covariant":
        sets = {b: FinSet(cat.hom(a, b)) for b in cat.objects}
        maps = {
            f: FinSetMap(
                sets[cat.dom[f]], sets[cat.cod[f]],
                {g: cat.compose(f, g) for g in sets[cat.dom[f]]},
            )
            for f in cat.morphisms
        }
        return SetFunctor(cat, sets, maps)
    if variance == "contravariant":
        op = cat.opposite()
        sets = {b: FinSet(cat.hom(b, a)) for b in op.objects}
        maps = {
            f: FinSetMap(
                sets[op.dom[f]], sets[op.cod[f]],
                {g: cat.compose(g, f) for g in sets[op.dom[f]]},
            )
            for f in op.morphisms
        }
        return SetFunctor(op, sets, maps)
    raise FinsheafError("variance must be covariant or contravariant")


def functor_predicates(F):
    """Faithful/full/embedding/dense/surjective flags by hom-class inspection."""
    src, dst = F.src, F.dst
    faithful = True
    full = True
    for a in src.objects:
        for b in src.objects:
            arrows = src.hom(a, b)
            images = [F.mor_map[f] for f in arrows]
            if len(set(images)) != len(images):
                faithful = False
            target = dst.hom(F.ob_map[a], F.ob_map[b])
            if not set(target) <= set(images):
                full = False
    ob_values = [F.ob_map[a] for a in src.objects]
    ob_injective = len(set(ob_values)) == len(ob_values)
    ob_surjective = set(ob_values) == set(dst.objects)
    dense = all(
        any(are_isomorphic_objects(dst, b, F.ob_map[a]) for a in src.objects)
        for b in dst.objects
    )
    return {
        "faithful": faithful,
        "full": full,
        "embedding": faithful and ob_injective,
        "dense": dense,
        "surjective": full and ob_surjective,
    }


# --- commutativity ----------------------------------------------------------------


def check_commutative(cat, objects, morphisms):
    """True iff all parallel paths in the subgraph compose to the same morphism.

    Paths are nonempty chains of subgraph morphisms between subgraph objects.
    Composite values live in the finite morphism set, so a breadth-first walk
    memoizing (start, end, composite) terminates even on cyclic subgraphs.
    """
    objects = list(objects)
    morphisms = [f for f in morphisms]
    for f in morphisms:
        if not cat.has_morphism(f):
            raise UnknownMorphism(f)
    obset = set(objects)
    out_edges = {}
    for f in morphisms:
        if cat.dom[f] in obset and cat.cod[f] in obset:
            out_edges.setdefault(cat.dom[f], []).append(f)
    # composite value and one witness path per (start, end, composite)
    seen = {}
    frontier = []
    for a in objects:
        for f in out_edges.get(a, ()):
            key = (a, cat.cod[f], f)
            if key not in seen:
                seen[key] = (f,)
                frontier.append(key)
    while frontier:
        start, end, value = frontier.pop()
        for f in out_edges.get(end, ()):
            nval = cat.compose(f, value)
            key = (start, cat.cod[f], nval)
            if key not in seen:
                seen[key] = seen[(start, end, value)] + (f,)
                frontier.append(key)
    by_endpoints = {}
    for (start, end, value), path in sorted(seen.items()):
        by_endpoints.setdefault((start, end), []).append((value, path))
    for (start, end), entries in sorted(by_endpoints.items()):
        if len({v for v, _ in entries}) > 1:
            return False, (entries[0][1], entries[1][1])
    return True, None


# --- subcategories -----------------------------------------------------------------


def subcategory(cat, objects, morphisms):
    """The subcategory on the given object/morphism id subsets, validated."""
    objects = [a for a in cat.objects if a in set(objects)]
    morphisms = [f for f in cat.morphisms if f in set(morphisms)]
    obset, morset = set(objects), set(morphisms)
    for f in morphisms:
        if cat.dom[f] not in obset or cat.cod[f] not in obset:
            raise InvalidSubcategory("morphism %s leaves the object subset" % f)
    for a in objects:
        if cat.identity_of(a) not in morset:
            raise InvalidSubcategory("identity of %s missing" % a)
    comp = {}
    for (g, f), h in cat.comp.items():
        if g in morset and f in morset:
            if h not in morset:
                raise InvalidSubcategory("composite %s escapes the subset" % h)
            comp[(g, f)] = h
    return validate_category(
        objects,
        [(f, cat.dom[f], cat.cod[f]) for f in morphisms],
        {a: cat.identity_of(a) for a in objects},
        comp,
    )


def full_subcategory(cat, objects):
    obset = set(objects)
    morphisms = [f for f in cat.morphisms if cat.dom[f] in obset and cat.cod[f] in obset]
    return subcategory(cat, objects, morphisms)


def subcategory_union(cat, parts):
    """Join of subcategories: the raw union closed under composition.

    A plain union of morphism sets need not be composition-closed (two chain
    pieces of a poset already fail), so the union is taken in the lattice of
    subcategories.
    """
    objects, morphisms = set(), set()
    for obs, mors in parts:
        objects |= set(obs)
        morphisms |= set(mors)
    changed = True
    while changed:
        changed = False
        for (g, f), h in cat.comp.items():
            if g in morphisms and f in morphisms and h not in morphisms:
                morphisms.add(h)
                changed = True
    return subcategory(cat, objects, morphisms)


def subcategory_intersection(cat, parts):
    parts = list(parts)
    objects = set(cat.objects)
    morphisms = set(cat.morphisms)
    for obs, mors in parts:
        objects &= set(obs)
        morphisms &= set(mors)
    return subcategory(cat, objects, morphisms)


def restrict_functor(F, sub):
    """Restriction of F to a subcategory of its source."""
    return FunctorTable(
        sub, F.dst,
        {a: F.ob_map[a] for a in sub.objects},
        {f: F.mor_map[f] for f in sub.morphisms},
    )


# --- exhaustive functor enumeration (test-scale helper) ------------------------------


def enumerate_functors(src, dst):
    """Yield every functor src -> dst; exponential, intended for tiny categories."""
    obs = list(src.objects)
    for ob_choice in iproduct(dst.objects, repeat=len(obs)):
        ob_map = dict(zip(obs, ob_choice))
        mor_slots = [f for f in src.morphisms if not src.is_identity(f)]
        candidates = [dst.hom(ob_map[src.dom[f]], ob_map[src.cod[f]]) for f in mor_slots]
        if any(len(c) == 0 for c in candidates):
            continue
        for mor_choice in iproduct(*candidates):
            mor_map = dict(zip(mor_slots, mor_choice))
            for a in obs:
                mor_map[src.identity_of(a)] = dst.identity_of(ob_map[a])
            if all(
                dst.comp.get((mor_map[g], mor_map[f])) == mor_map[h]
                for (g, f), h in src.comp.items()
            ):
                yield FunctorTable(src, dst, ob_map, mor_map)


def enumerate_nats(F, G):
    """Yield every nat F -> G; exponential, intended for tiny categories."""
    obs = list(F.src.objects)
    dst = F.dst
    candidates = [dst.hom(F.ob_map[a], G.ob_map[a]) for a in obs]
    if any(len(c) == 0 for c in candidates):
        return
    for choice in iproduct(*candidates):
        components = dict(zip(obs, choice))
        ok = all(
            dst.compose(G.mor_map[f], components[F.src.dom[f]])
            == dst.compose(components[F.src.cod[f]], F.mor_map[f])
            for f in F.src.morphisms
        )
        if ok:
            yield NatTable(F, G, components)
