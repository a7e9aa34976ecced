"""Finite topology algebras: posets with all meets and joins, distributive,
with top and bottom.  Meets and joins are always derived from the order as
infima/suprema, never accepted as input, so inconsistent tables cannot arise.

Elements are opaque string ids.  Internally everything runs on bitmasks over
element indices: joins of arbitrary subsets, the equational axioms quantified
over all subsets, and the particle (completely-prime filter) scan all use
2^n dynamic programming, which keeps the exhaustive semantics affordable for
carriers up to ~16 elements (the full corpus of topologies on 4 points).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import FinsheafError, ValidationFailure


class InvalidAlgebra(ValidationFailure):
    pass


class NotATopology(FinsheafError):
    pass


class NotAnElement(FinsheafError):
    pass


class HomInvalid(FinsheafError):
    pass


class NotAParticle(FinsheafError):
    pass


MAX_EXHAUSTIVE_BITS = 22  # 2^n DP tables; beyond this the scan is hopeless anyway


@dataclass(frozen=True)
class Violation:
    kind: str
    items: tuple

    def __str__(self):
        return "%s%r" % (self.kind, self.items)


class TopologyAlgebra:
    """Validated finite frame.  Treat instances as immutable; the lazy caches
    (subset-join table, particles) are derived data only."""

    def __init__(self, elements, leq_pairs, _validated=False):
        if not _validated:
            raise FinsheafError("use validate_algebra to construct algebras")
        self.elements = tuple(elements)
        self._index = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        self.leq_pairs = frozenset(leq_pairs)
        self._down = [0] * n
        self._up = [0] * n
        for a, b in self.leq_pairs:
            ia, ib = self._index[a], self._index[b]
            self._down[ib] |= 1 << ia
            self._up[ia] |= 1 << ib
        self._meet_idx = None
        self._join_idx = None
        self.top = None
        self.bottom = None
        self._join_of_mask = None
        self._particles = None
        self._antichains = None

    # -- basic order interface ---------------------------------------------

    def index(self, x):
        try:
            return self._index[x]
        except KeyError:
            raise NotAnElement(repr(x)) from None

    def __contains__(self, x):
        return x in self._index

    def __len__(self):
        return len(self.elements)

    def leq(self, x, y):
        return (x, y) in self.leq_pairs

    def below(self, y):
        """Elements <= y, in element order."""
        iy = self.index(y)
        return tuple(e for i, e in enumerate(self.elements) if self._down[iy] >> i & 1)

    def above(self, x):
        ix = self.index(x)
        return tuple(e for i, e in enumerate(self.elements) if self._up[ix] >> i & 1)

    def comparable_pairs(self):
        """All (x, y) with x <= y, in element-index order."""
        out = []
        for i, x in enumerate(self.elements):
            for j, y in enumerate(self.elements):
                if self._up[i] >> j & 1:
                    out.append((x, y))
        return out

    # -- lattice operations --------------------------------------------------

    def meet(self, x, y):
        return self.elements[self._meet_idx[self.index(x)][self.index(y)]]

    def join2(self, x, y):
        return self.elements[self._join_idx[self.index(x)][self.index(y)]]

    def join_of_mask_table(self):
        """join_of[mask] = index of the join of the subset encoded by mask."""
        if self._join_of_mask is None:
            n = len(self.elements)
            bot = self.index(self.bottom)
            table = [bot] * (1 << n)
            join_idx = self._join_idx
            for mask in range(1, 1 << n):
                low = (mask & -mask).bit_length() - 1
                table[mask] = join_idx[table[mask & (mask - 1)]][low]
            self._join_of_mask = table
        return self._join_of_mask

    def join(self, xs):
        mask = 0
        for x in xs:
            mask |= 1 << self.index(x)
        return self.elements[self.join_of_mask_table()[mask]]

    def meet_of(self, xs):
        it = iter(xs)
        try:
            acc = next(it)
        except StopIteration:
            return self.top
        for x in it:
            acc = self.meet(acc, x)
        return acc

    def mask_of(self, xs):
        mask = 0
        for x in xs:
            mask |= 1 << self.index(x)
        return mask

    def elements_of_mask(self, mask):
        return tuple(e for i, e in enumerate(self.elements) if mask >> i & 1)

    # -- covering / antichain machinery ---------------------------------------

    def antichains(self):
        """All antichain subsets (no member below another), as masks, ascending."""
        if self._antichains is None:
            n = len(self.elements)
            comparable = [0] * n
            for i in range(n):
                comparable[i] = self._up[i] | self._down[i]
            out = []
            for mask in range(1 << n):
                m = mask
                ok = True
                while m:
                    low = (m & -m).bit_length() - 1
                    if comparable[low] & mask & ~(1 << low):
                        ok = False
                        break
                    m &= m - 1
                if ok:
                    out.append(mask)
            self._antichains = tuple(out)
        return self._antichains

    def maximal_members(self, mask):
        """Mask of the maximal elements of the subset: the antichain with the
        same join (every dropped member sits below a kept one)."""
        out = mask
        m = mask
        while m:
            low = (m & -m).bit_length() - 1
            if self._up[low] & mask & ~(1 << low):
                out &= ~(1 << low)
            m &= m - 1
        return out


def check_algebra_tables(elements, leq_pairs):
    """Derive the lattice from the order and check every axiom exhaustively.

    Returns (violations, prepared TopologyAlgebra or None).  The subset-indexed
    axioms (absorption and distributivity over families, completeness of joins)
    are checked over all 2^n subsets via mask dynamic programming.
    """
    violations = []
    elements = tuple(elements)
    n = len(elements)
    if len(set(elements)) != n:
        return [Violation("DuplicateElement", (elements,))], None
    if n > MAX_EXHAUSTIVE_BITS:
        raise FinsheafError("carrier too large for exhaustive subset checks")
    index = {e: i for i, e in enumerate(elements)}
    for a, b in leq_pairs:
        if a not in index or b not in index:
            violations.append(Violation("UnknownElement", (a, b)))
    if violations:
        return violations, None
    rel = set(leq_pairs) | {(e, e) for e in elements}
    for a, b in rel:
        if (b, a) in rel and a != b:
            violations.append(Violation("NotAntisymmetric", (a, b)))
    for a, b in rel:
        for b2, c in rel:
            if b == b2 and (a, c) not in rel:
                violations.append(Violation("NotTransitive", (a, b, c)))
    if violations:
        return violations, None

    alg = TopologyAlgebra(elements, rel, _validated=True)
    down, up = alg._down, alg._up
    full = (1 << n) - 1
    bots = [i for i in range(n) if up[i] == full]
    tops = [i for i in range(n) if down[i] == full]
    if not bots:
        violations.append(Violation("MissingJoin", ((),)))
    if not tops:
        violations.append(Violation("MissingMeet", ((),)))
    if violations:
        return violations, None
    alg.bottom = elements[bots[0]]
    alg.top = elements[tops[0]]

    meet_idx = [[None] * n for _ in range(n)]
    join_idx = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            common = down[i] & down[j]
            m = None
            mm = common
            while mm:
                low = (mm & -mm).bit_length() - 1
                if down[low] == common:
                    m = low
                    break
                mm &= mm - 1
            if m is None:
                violations.append(Violation("MissingMeet", (elements[i], elements[j])))
            meet_idx[i][j] = meet_idx[j][i] = m
            commonu = up[i] & up[j]
            jn = None
            mm = commonu
            while mm:
                low = (mm & -mm).bit_length() - 1
                if up[low] == commonu:
                    jn = low
                    break
                mm &= mm - 1
            if jn is None:
                violations.append(Violation("MissingJoin", ((elements[i], elements[j]),)))
            join_idx[i][j] = join_idx[j][i] = jn
    if violations:
        return violations, None
    alg._meet_idx = meet_idx
    alg._join_idx = join_idx

    # equational axioms on the derived operations
    for i in range(n):
        for j in range(n):
            if meet_idx[i][j] != meet_idx[j][i]:
                violations.append(
                    Violation("AxiomViolation", ("meet-commutative", elements[i], elements[j]))
                )
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if meet_idx[meet_idx[i][j]][k] != meet_idx[i][meet_idx[j][k]]:
                    violations.append(
                        Violation(
                            "AxiomViolation",
                            ("meet-associative", elements[i], elements[j], elements[k]),
                        )
                    )
    # absorption over pairs: join{x, x ∧ y} = x
    for i in range(n):
        for j in range(n):
            if join_idx[i][meet_idx[i][j]] != i:
                violations.append(
                    Violation("AxiomViolation", ("absorption", elements[i], elements[j]))
                )
    # binary distributivity: join{x, y ∧ z} = join{x,y} ∧ join{x,z}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if join_idx[i][meet_idx[j][k]] != meet_idx[join_idx[i][j]][join_idx[i][k]]:
                    violations.append(
                        Violation(
                            "AxiomViolation",
                            ("distributive", elements[i], elements[j], elements[k]),
                        )
                    )
    # identity laws
    ti, bi = index[alg.top], index[alg.bottom]
    for i in range(n):
        if meet_idx[ti][i] != i:
            violations.append(Violation("AxiomViolation", ("top-identity", elements[i])))
        if join_idx[bi][i] != i:
            violations.append(Violation("AxiomViolation", ("bottom-identity", elements[i])))
    if violations:
        return violations, None

    # family axioms over all subsets: x ∧ join({x} ∪ S) = x   and
    # x ∧ join(S) = join{x ∧ s : s ∈ S}
    join_of = alg.join_of_mask_table()
    size = 1 << n
    for i in range(n):
        bit = 1 << i
        meet_i = meet_idx[i]
        meet_img = [0] * size
        for mask in range(1, size):
            low = (mask & -mask).bit_length() - 1
            meet_img[mask] = meet_img[mask & (mask - 1)] | (1 << meet_i[low])
        for mask in range(size):
            if meet_i[join_of[mask | bit]] != i:
                violations.append(
                    Violation(
                        "AxiomViolation",
                        ("absorption-family", elements[i], alg.elements_of_mask(mask)),
                    )
                )
                break
            if meet_i[join_of[mask]] != join_of[meet_img[mask]]:
                violations.append(
                    Violation(
                        "AxiomViolation",
                        ("distributive-family", elements[i], alg.elements_of_mask(mask)),
                    )
                )
                break
    if violations:
        return violations, None
    return [], alg


def validate_algebra(elements, leq_pairs):
    violations, alg = check_algebra_tables(elements, leq_pairs)
    if violations:
        raise InvalidAlgebra("invalid topology algebra", violations)
    return alg


# --- particles --------------------------------------------------------------------


@dataclass(frozen=True)
class Particle:
    members: frozenset

    def __contains__(self, x):
        return x in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)


def particles(alg):
    """All completely-prime filters, by plain exponential scan.

    Every subset of the carrier minus bottom is considered; an upward-closure
    mask test prunes first, then meet-closure, then the cofinality condition is
    checked against ALL subsets S with join(S) in the candidate (no directedness
    restriction on S).  Nonempty is required: a point must contain the top.
    Results are cached on the algebra and ordered by (size, member indices).
    """
    if alg._particles is not None:
        return alg._particles
    n = len(alg)
    bot = alg.index(alg.bottom)
    up, meet_idx = alg._up, alg._meet_idx
    join_of = alg.join_of_mask_table()
    size = 1 << n
    survivors = []
    for pm in range(size):
        if pm == 0 or pm >> bot & 1:
            continue
        m = pm
        ok = True
        while m:
            low = (m & -m).bit_length() - 1
            if up[low] & ~pm:
                ok = False
                break
            m &= m - 1
        if not ok:
            continue
        members = [i for i in range(n) if pm >> i & 1]
        if any(not pm >> meet_idx[i][j] & 1 for i in members for j in members):
            continue
        survivors.append(pm)
    found = []
    for pm in survivors:
        ok = True
        for mask in range(size):
            if pm >> join_of[mask] & 1 and not mask & pm:
                ok = False
                break
        if ok:
            found.append(pm)
    result = [
        Particle(frozenset(alg.elements[i] for i in range(n) if pm >> i & 1))
        for pm in found
    ]
    result.sort(key=lambda p: (len(p.members), sorted(alg.index(x) for x in p.members)))
    alg._particles = tuple(result)
    return alg._particles


def is_particle(alg, members):
    """Direct check of the three filter conditions plus nonemptiness."""
    members = frozenset(members)
    if not members or alg.bottom in members:
        return False
    for x in members:
        for y in alg.above(x):
            if y not in members:
                return False
    for x in members:
        for y in members:
            if alg.meet(x, y) not in members:
                return False
    pm = alg.mask_of(members)
    join_of = alg.join_of_mask_table()
    for mask in range(1 << len(alg)):
        if pm >> join_of[mask] & 1 and not mask & pm:
            return False
    return True


@dataclass(frozen=True)
class SetRepresentation:
    """T_x = the set of particles containing x, realized as particle indices."""

    algebra: TopologyAlgebra
    points: tuple  # Particle list, fixed order
    table: dict  # element -> frozenset of particle indices

    def t(self, x):
        return self.table[x]


def set_representation(alg):
    """Build T and verify its two identities over all pairs and all subsets."""
    pts = particles(alg)
    n = len(alg)
    tmask = [0] * n
    for k, p in enumerate(pts):
        for x in p.members:
            tmask[alg.index(x)] |= 1 << k
    meet_idx = alg._meet_idx
    for i in range(n):
        for j in range(n):
            if tmask[meet_idx[i][j]] != tmask[i] & tmask[j]:
                raise FinsheafError(
                    "meet identity fails at (%s, %s)" % (alg.elements[i], alg.elements[j])
                )
    join_of = alg.join_of_mask_table()
    size = 1 << n
    cup = [0] * size
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        cup[mask] = cup[mask & (mask - 1)] | tmask[low]
        if tmask[join_of[mask]] != cup[mask]:
            raise FinsheafError("join identity fails at mask %d" % mask)
    table = {
        e: frozenset(k for k in range(len(pts)) if tmask[i] >> k & 1)
        for i, e in enumerate(alg.elements)
    }
    return SetRepresentation(alg, pts, table)


def algebra_predicates(alg):
    """topological: T injective; separatable: distinct points have disjoint
    (meet = bottom) witnesses."""
    rep = set_representation(alg)
    values = [rep.table[e] for e in alg.elements]
    topological = len(set(values)) == len(values)
    pts = rep.points
    separatable = True
    for p, q in combinations(pts, 2):
        if not any(
            alg.meet(x, y) == alg.bottom for x in p.members for y in q.members
        ):
            separatable = False
    return {"topological": topological, "separatable": separatable}


# --- homomorphisms ------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraHom:
    src: TopologyAlgebra
    dst: TopologyAlgebra
    table: dict

    def __post_init__(self):
        f = self.table
        for x in self.src.elements:
            if x not in f or f[x] not in self.dst:
                raise HomInvalid("map gap at %r" % (x,))
        if f[self.src.top] != self.dst.top or f[self.src.bottom] != self.dst.bottom:
            raise HomInvalid("constants not preserved")
        # binary meet/join preservation; arbitrary joins follow by folding
        for x in self.src.elements:
            for y in self.src.elements:
                if f[self.src.meet(x, y)] != self.dst.meet(f[x], f[y]):
                    raise HomInvalid("meet not preserved at (%r, %r)" % (x, y))
                if f[self.src.join2(x, y)] != self.dst.join2(f[x], f[y]):
                    raise HomInvalid("join not preserved at (%r, %r)" % (x, y))

    def __call__(self, x):
        return self.table[x]


def identity_hom(alg):
    return AlgebraHom(alg, alg, {x: x for x in alg.elements})


@dataclass(frozen=True)
class PatlMap:
    """Point map Patl_X -> Patl_Y of a hom f: Y -> X, with the T tables."""

    hom: AlgebraHom
    point_map: dict  # X-particle index -> Y-particle index
    t_tables: dict  # y in Y -> dict X-particle index -> Y-particle index


def patl_of_hom(f):
    """p |-> f^{-1}(p); verifies the preimages are particles and that the
    preimage of every T_y is exactly T_{f(y)} (continuity)."""
    Y, X = f.src, f.dst
    pts_x = particles(X)
    pts_y = particles(Y)
    y_index = {p.members: i for i, p in enumerate(pts_y)}
    point_map = {}
    for i, p in enumerate(pts_x):
        pre = frozenset(y for y in Y.elements if f(y) in p.members)
        if not is_particle(Y, pre):
            raise HomInvalid("preimage of a particle is not a particle")
        point_map[i] = y_index[pre]
    rep_x = set_representation(X)
    rep_y = set_representation(Y)
    for y in Y.elements:
        pre_ty = frozenset(i for i in range(len(pts_x)) if point_map[i] in rep_y.table[y])
        if pre_ty != rep_x.table[f(y)]:
            raise HomInvalid("continuity fails at %r" % (y,))
    t_tables = {
        y: {i: point_map[i] for i in sorted(rep_x.table[f(y)])}
        for y in Y.elements
    }
    return PatlMap(f, point_map, t_tables)


# --- spaces -> algebras ----------------------------------------------------------------


def open_name(points, subset):
    """Canonical element id of an open set: '{a,c}' with points in point order."""
    order = {p: i for i, p in enumerate(points)}
    return "{%s}" % ",".join(sorted(subset, key=lambda p: order[p]))


@dataclass(frozen=True)
class OpenSetAlgebra:
    algebra: TopologyAlgebra
    points: tuple
    open_of: dict  # element id -> frozenset of points
    elem_of: dict  # frozenset of points -> element id


def from_topology(points, opens):
    """Open-set lattice under inclusion; closure failures reported up front."""
    points = tuple(points)
    opens = [frozenset(u) for u in opens]
    seen = set()
    for u in opens:
        if u in seen:
            raise NotATopology("duplicate open %r" % (sorted(u),))
        seen.add(u)
        if not u <= set(points):
            raise NotATopology("open %r uses unknown points" % (sorted(u),))
    universe = frozenset(points)
    if frozenset() not in seen:
        raise NotATopology("empty set missing")
    if universe not in seen:
        raise NotATopology("full set missing")
    for u in opens:
        for v in opens:
            if u | v not in seen:
                raise NotATopology("union of %r and %r missing" % (sorted(u), sorted(v)))
            if u & v not in seen:
                raise NotATopology(
                    "intersection of %r and %r missing" % (sorted(u), sorted(v))
                )
    order = {p: i for i, p in enumerate(points)}
    opens_sorted = sorted(opens, key=lambda u: (len(u), sorted(order[p] for p in u)))
    ids = [open_name(points, u) for u in opens_sorted]
    leq = [
        (ids[i], ids[j])
        for i in range(len(ids))
        for j in range(len(ids))
        if opens_sorted[i] <= opens_sorted[j]
    ]
    alg = validate_algebra(ids, leq)
    open_of = dict(zip(ids, opens_sorted))
    elem_of = {u: e for e, u in open_of.items()}
    return OpenSetAlgebra(alg, points, open_of, elem_of)


def point_particle(osa, a):
    """The particle of opens containing the point a."""
    members = frozenset(e for e, u in osa.open_of.items() if a in u)
    if not is_particle(osa.algebra, members):
        raise FinsheafError("point filter is not a particle")
    return Particle(members)


def point_map(osa):
    """a |-> p_a as particle indices; every value verified to be a particle."""
    pts = particles(osa.algebra)
    index = {p.members: i for i, p in enumerate(pts)}
    return {a: index[point_particle(osa, a).members] for a in osa.points}


def enumerate_topologies(points):
    """Every topology on the given points, deterministically ordered.

    Families of subsets are scanned as bitmasks over the powerset; each must
    contain the empty and full sets and be closed under pairwise union and
    intersection (which in the finite case gives all unions).
    """
    points = tuple(points)
    n = len(points)
    powersize = 1 << n
    full = powersize - 1
    topologies = []
    base = (1 << 0) | (1 << full)  # empty set mask-index 0, full set index 2^n - 1
    free_bits = [i for i in range(powersize) if i not in (0, full)]
    for choice in range(1 << len(free_bits)):
        fam = base
        for k, b in enumerate(free_bits):
            if choice >> k & 1:
                fam |= 1 << b
        members = []
        m = fam
        while m:
            low = (m & -m).bit_length() - 1
            members.append(low)
            m &= m - 1
        ok = True
        for i, u in enumerate(members):
            for v in members[i + 1:]:
                if not fam >> (u | v) & 1 or not fam >> (u & v) & 1:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            opens = [
                frozenset(points[i] for i in range(n) if u >> i & 1) for u in members
            ]
            topologies.append((fam, opens))
    topologies.sort(key=lambda t: t[0])
    return [opens for _, opens in topologies]


# --- subalgebras --------------------------------------------------------------------


def subalgebra(alg, y):
    """The elements below y with the induced order; top is y, bottom kept."""
    if y not in alg:
        raise NotAnElement(repr(y))
    carrier = alg.below(y)
    cs = set(carrier)
    leq = [(a, b) for (a, b) in alg.leq_pairs if a in cs and b in cs]
    return validate_algebra(carrier, leq)


def intersect_subalgebras(alg, y, z):
    """Y ∩ Z = (1_Y ∧ 1_Z)^<= ; returns the algebra and its top element."""
    m = alg.meet(y, z)
    sub = subalgebra(alg, m)
    if set(sub.elements) != set(alg.below(y)) & set(alg.below(z)):
        raise FinsheafError("intersection carrier mismatch")
    return sub, m


@dataclass(frozen=True)
class GluedUnion:
    algebra: TopologyAlgebra
    top_element: str


def glued_union(alg, ys):
    """The least subalgebra in which the union of the y^<= is integrally
    cofinal: every nonzero member has a nonzero element of the union below it."""
    ys = list(ys)
    z = alg.join(ys)
    sub = subalgebra(alg, z)
    union = set()
    for y in ys:
        union |= set(alg.below(y))
    union.discard(alg.bottom)
    for x in sub.elements:
        if x == alg.bottom:
            continue
        if not any(alg.leq(w, x) for w in union):
            raise FinsheafError("union not integrally cofinal below %r" % (x,))
    return GluedUnion(sub, z)
