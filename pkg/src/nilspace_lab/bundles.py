"""Factor structure of finite cube spaces: equivalence classes, factor spaces,
structure groups, and iterated-bundle certification.

Points x, y are i-equivalent when the one-corner map on {0,1}^(i+1) sending the
origin to x and every other vertex to y is a cube.  Quotients by that relation
are again cubespaces (a cube downstairs is a cube that lifts), and the groups
acting freely on the fibers of consecutive quotients are recovered by explicit
search over fiber-preserving bijections.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .cubespace import (Cubespace, DegreeProductSpace, dk_structure,
                        is_morphism, normalize_map)
from .errors import (InvalidArgumentError, ResourceLimitError,
                     StructuralFailureError, candidate_budget)
from .groups import FinAbGroup, invariant_factors_of, make_group


def sim_relation(N: Cubespace, i: int, x, y) -> bool:
    """Is the one-corner (i+1)-cube with x at the origin and y elsewhere a member?"""
    n = i + 1
    cube = tuple(x if v == 0 else y for v in range(1 << n))
    return N.member(n, cube)


def sim_classes(N: Cubespace, i: int) -> list[tuple]:
    """Partition of the ground set by the one-corner relation at level i.

    Reflexivity, symmetry, and transitivity are verified exhaustively; a
    violation means the oracle is not a nilspace and raises a structural
    failure with the offending pair.
    """
    if i + 1 > N.n_max:
        raise InvalidArgumentError("relation needs dimension i+1 <= n_max")
    pts = N.ground
    rel = {(x, y): sim_relation(N, i, x, y) for x in pts for y in pts}
    for x in pts:
        if not rel[(x, x)]:
            raise StructuralFailureError("relation not reflexive", witness=(x, x))
    for x in pts:
        for y in pts:
            if rel[(x, y)] != rel[(y, x)]:
                raise StructuralFailureError("relation not symmetric",
                                             witness=(x, y))
    for x in pts:
        for y in pts:
            for z in pts:
                if rel[(x, y)] and rel[(y, z)] and not rel[(x, z)]:
                    raise StructuralFailureError("relation not transitive",
                                                 witness=(x, y, z))
    classes = []
    seen = set()
    for x in pts:
        if x in seen:
            continue
        cls = tuple(y for y in pts if rel[(x, y)])
        seen.update(cls)
        classes.append(cls)
    return classes


class FactorSpace(Cubespace):
    """Quotient cubespace: a class-valued map is a cube iff it lifts to one.

    Membership is decided against the memoized projection of the enumerated
    cube set of the base (existence of a lift), one dimension at a time.
    """

    def __init__(self, base: Cubespace, classes, budget: int | None = None):
        self.base = base
        self.classes = [tuple(c) for c in classes]
        self.class_of = {}
        for cls in self.classes:
            for x in cls:
                self.class_of[x] = cls
        super().__init__(self.classes, n_max=base.n_max,
                         step_hint=None)
        self._budget = budget
        self._projected: dict[int, frozenset] = {}

    def _proj_set(self, n: int) -> frozenset:
        if n not in self._projected:
            cubes = self.base.enumerate_cubes(n, self._budget)
            self._projected[n] = frozenset(
                tuple(self.class_of[x] for x in c) for c in cubes)
        return self._projected[n]

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        return tuple(cube) in self._proj_set(n)

    def enumerate_cubes(self, n: int, budget: int | None = None):
        return iter(sorted(self._proj_set(n)))


def factor_nilspace(N: Cubespace, i: int,
                    budget: int | None = None) -> tuple[FactorSpace, dict]:
    """Quotient of N by the level-i relation plus the projection map.

    The projection is re-verified as a morphism even though it is one by
    construction of the quotient's cube sets.
    """
    classes = sim_classes(N, i)
    F = FactorSpace(N, classes, budget=budget)
    projection = {x: F.class_of[x] for x in N.ground}
    check_dims = min(N.n_max, 3)
    if not is_morphism(projection, N, F, n_upto=check_dims, budget=budget):
        raise StructuralFailureError("projection is not a morphism")
    return F, projection


def _as_step(N: Cubespace, k: int | None) -> int:
    if k is not None:
        return k
    if N.step_hint is None:
        raise InvalidArgumentError("step unknown; pass k or set step_hint")
    return N.step_hint


@dataclass
class StructureGroupResult:
    """Fiber-translation group at one level, with its action on the ground set."""

    group: FinAbGroup
    level: int
    space: Cubespace           # the level's factor space the group acts on
    translations: list[dict]   # all fiber translations, identity first
    generators: list[dict]     # one per invariant factor of `group`

    def act(self, coords, point):
        """Apply the group element with the given coordinates to a point."""
        out = point
        for c, gen in zip(coords, self.generators, strict=True):
            for _ in range(c % _gen_order(gen)):
                out = gen[out]
        return out


def _gen_order(mapping: dict) -> int:
    order = 1
    current = mapping
    ident = {x: x for x in mapping}
    while current != ident:
        current = {x: mapping[current[x]] for x in current}
        order += 1
    return order


def _compose(f: dict, g: dict) -> dict:
    return {x: f[g[x]] for x in g}


def _fiber_translations(X: Cubespace, fibers, i: int,
                        budget: int) -> list[dict]:
    """All bijections preserving each fiber that are height-i translations."""
    from .extensions import is_translation
    total = math.prod(math.factorial(len(f)) for f in fibers)
    if total > budget:
        raise ResourceLimitError(
            f"{total} fiber bijections exceed budget {budget}",
            needed=total, budget=budget)
    out = []
    perms_per_fiber = [list(itertools.permutations(f)) for f in fibers]
    for combo in itertools.product(*perms_per_fiber):
        mapping = {}
        for fib, perm in zip(fibers, combo):
            mapping.update(dict(zip(fib, perm)))
        if is_translation(mapping, X, i):
            out.append(mapping)
    return out


def structure_group(N: Cubespace, i: int, k: int | None = None,
                    budget: int | None = None) -> StructureGroupResult:
    """Group of fiber translations at level i, in invariant-factor form.

    Works inside the i-th factor space: its fibers over the (i-1)-st factor
    carry a free transitive action by the height-i translations that preserve
    every fiber.  Extraction is a brute-force search over fiber bijections
    followed by a group-structure identification.
    """
    cap = candidate_budget(budget)
    k = _as_step(N, k)
    if not 1 <= i <= k:
        raise InvalidArgumentError("level must satisfy 1 <= i <= k")
    if i == k:
        X: Cubespace = N
    else:
        X, _ = factor_nilspace(N, i, budget=budget)
    if i == 1:
        fibers = [tuple(X.ground)]
    else:
        fibers = [tuple(c) for c in sim_classes(X, i - 1)]
    translations = _fiber_translations(X, fibers, i, cap)
    ident = {x: x for x in X.ground}
    if ident not in translations:
        raise StructuralFailureError("identity is not a translation",
                                     witness=ident)
    sizes = {len(f) for f in fibers}
    if len(sizes) != 1:
        raise StructuralFailureError("fibers have unequal sizes", witness=fibers)
    fiber_size = sizes.pop()
    if len(translations) != fiber_size:
        raise StructuralFailureError(
            f"{len(translations)} fiber translations for fiber size {fiber_size}; "
            "action is not free and transitive", witness=translations)
    # freeness and transitivity on every fiber
    for fib in fibers:
        for x in fib:
            images = [t[x] for t in translations]
            if len(set(images)) != len(images) or set(images) != set(fib):
                raise StructuralFailureError(
                    "action not free and transitive on a fiber",
                    witness=(fib, x))
    # closure and commutativity
    keyed = {tuple(sorted(t.items())): t for t in translations}
    for a in translations:
        for b in translations:
            ab = _compose(a, b)
            if tuple(sorted(ab.items())) not in keyed:
                raise StructuralFailureError("translations not closed",
                                             witness=(a, b))
            if ab != _compose(b, a):
                raise StructuralFailureError("fiber translations not abelian",
                                             witness=(a, b))
    group, gens = _identify_abelian(translations)
    return StructureGroupResult(group=group, level=i, space=X,
                                translations=translations, generators=gens)


def _identify_abelian(translations: list[dict]) -> tuple[FinAbGroup, list[dict]]:
    """Invariant factors of an abelian permutation group plus matching generators."""
    order = len(translations)
    if order == 1:
        return make_group([]), []
    orders = {id(t): _gen_order(t) for t in translations}
    inv = invariant_factors_of_group(translations, orders)
    # search generator tuples realizing the invariant factors
    for combo in itertools.permutations(translations, len(inv)):
        if any(orders[id(t)] != d for t, d in zip(combo, inv)):
            continue
        generated = _span(combo, inv)
        if len(generated) == order:
            return make_group(list(inv)), list(combo)
    raise StructuralFailureError("could not identify the abelian structure",
                                 witness=inv)


def invariant_factors_of_group(translations, orders) -> tuple[int, ...]:
    """Invariant factors of an abelian group given by its permutation table."""
    n = len(translations)
    # the multiset of element orders determines a finite abelian group at desk
    # scale; match against candidate factorizations
    from collections import Counter
    got = Counter(orders[id(t)] for t in translations)
    for cand in _abelian_types(n):
        G = make_group(list(cand))
        want = Counter(G.element_order(x) for x in G.elements)
        if want == got:
            return cand
    raise StructuralFailureError("no abelian type matches the element orders",
                                 witness=dict(got))


def _abelian_types(n: int):
    """All invariant-factor chains d_1 | d_2 | ... with product n."""
    out = []

    def rec(remaining, minimum, chain):
        if remaining == 1:
            out.append(tuple(sorted(chain)))
            return
        d = minimum
        while d <= remaining:
            if remaining % d == 0 and d >= minimum:
                rec(remaining // d, d, chain + [d])
            d += 1

    rec(n, 2, [])
    # deduplicate; ensure divisibility chain
    uniq = set()
    for t in out:
        ok = all(t[a + 1] % t[a] == 0 for a in range(len(t) - 1))
        if ok and math.prod(t) == n:
            uniq.add(t)
    return sorted(uniq)


def _span(gens, gen_orders) -> list[dict]:
    if not gens:
        return []
    ident = {x: x for x in gens[0]}
    seen = {tuple(sorted(ident.items())): ident}
    for g, d in zip(gens, gen_orders):
        current = list(seen.values())
        power = ident
        for _ in range(d - 1):
            power = _compose(power, g)
            for h in current:
                hp = _compose(h, power)
                seen.setdefault(tuple(sorted(hp.items())), hp)
    return list(seen.values())


@dataclass
class BundleDecomposition:
    """Certified iterated-bundle data of a k-step space."""

    base: Cubespace
    kstep: int
    factors: list[Cubespace]            # F_1(N) ... F_k(N) = N
    projections: list[dict]             # ground(N) -> ground(F_i)
    structure_groups: list[StructureGroupResult]
    dims_checked: int
    notes: dict = field(default_factory=dict)


def verify_degree_bundle(N: Cubespace, k: int | None = None,
                         n_upto: int | None = None,
                         budget: int | None = None) -> BundleDecomposition:
    """Certify the iterated abelian-bundle presentation of a k-step space.

    Builds the factor tower, extracts the structure groups, then checks for
    every level and dimension that (a) factor cubes lift and (b) the lift fiber
    over a cube is exactly the orbit of the top-degree structure cubes under
    the fiber action.  Any failure raises with a witness.
    """
    cap = candidate_budget(budget)
    k = _as_step(N, k)
    n_upto = min(N.n_max, k + 1) if n_upto is None else n_upto
    factors: list[Cubespace] = []
    projections: list[dict] = []
    for i in range(1, k + 1):
        if i == k:
            factors.append(N)
            projections.append({x: x for x in N.ground})
        else:
            F, proj = factor_nilspace(N, i, budget=budget)
            factors.append(F)
            projections.append(proj)
    groups = [structure_group(N, i, k=k, budget=budget) for i in range(1, k + 1)]

    for i in range(1, k + 1):
        upper = factors[i - 1]
        lower: Cubespace | None = factors[i - 2] if i >= 2 else None
        sg = groups[i - 1]
        if i >= 2:
            # projection upper -> lower: an upper class sits inside exactly
            # one lower class
            down = {}
            for x in upper.ground:
                members = set(x) if isinstance(upper, FactorSpace) else {x}
                for cls in lower.ground:
                    if members <= set(cls):
                        down[x] = cls
                        break
                else:
                    raise StructuralFailureError(
                        "factor tower projection undefined", witness=x)
        degree_cubes = dk_structure(sg.group, i) if sg.group.order > 1 else None
        for n in range(1, n_upto + 1):
            upper_cubes = list(upper.enumerate_cubes(n, cap))
            if i >= 2:
                lower_set = set(lower.enumerate_cubes(n, cap))
                projected = {tuple(down[x] for x in c) for c in upper_cubes}
                if projected != lower_set:
                    raise StructuralFailureError(
                        f"cube lifting fails at level {i}, dimension {n}",
                        witness=(projected ^ lower_set))
                group_key = lambda c: tuple(down[x] for x in c)
            else:
                group_key = lambda c: None
            by_base: dict = {}
            for c in upper_cubes:
                by_base.setdefault(group_key(c), []).append(c)
            for base_cube, lifts in by_base.items():
                rep = lifts[0]
                if degree_cubes is None:
                    orbit = {rep}
                else:
                    orbit = set()
                    for d in degree_cubes.enumerate_cubes(n, cap):
                        orbit.add(tuple(sg.act(d[v], rep[v])
                                        for v in range(1 << n)))
                if orbit != set(lifts):
                    raise StructuralFailureError(
                        f"lift fiber is not a degree-{i} orbit at dimension {n}",
                        witness=(base_cube, orbit ^ set(lifts)))
    return BundleDecomposition(base=N, kstep=k, factors=factors,
                               projections=projections,
                               structure_groups=groups, dims_checked=n_upto)


def is_factor_map(phi, N: Cubespace, M: Cubespace, k: int | None = None,
                  n_upto: int = 3, budget: int | None = None) -> bool:
    """Morphism whose image of every level-i class is exactly a level-i class.

    The level-0 class is the whole ground set, so factor maps are surjective;
    a constant map onto a bigger space maps classes into, not onto, classes.
    """
    table = normalize_map(phi, N, M)
    if not is_morphism(table, N, M, n_upto=min(n_upto, N.n_max, M.n_max),
                       budget=budget):
        raise InvalidArgumentError("map is not a morphism")
    k = k if k is not None else (N.step_hint or M.step_hint)
    if k is None:
        raise InvalidArgumentError("step unknown; pass k")
    if set(table.values()) != set(M.ground):
        return False
    for i in range(1, k + 1):
        if i + 1 > min(N.n_max, M.n_max):
            break
        classes_n = sim_classes(N, i)
        classes_m = {frozenset(c) for c in sim_classes(M, i)}
        for cls in classes_n:
            image = frozenset(table[x] for x in cls)
            if image not in classes_m:
                return False
    return True
