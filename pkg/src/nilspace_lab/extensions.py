"""Degree-k extensions, split sections, translation groups, and arrow spaces.

An extension is an abelian bundle over a cubespace whose cube sets lift from
the base and whose lift fibers are cosets of the degree-k structure on the
fiber group.  Translations of height i act on any codimension-i face of any
cube without leaving the cube set.  Everything here certifies exhaustively at
desk scale; searches return explicit witnesses or explicit exhaustion
certificates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .cubes import enumerate_faces, popcount
from .cubespace import (Cubespace, DegreeProductSpace, dk_structure,
                        is_morphism, mobius_coefficients, normalize_map,
                        point_space)
from .errors import (InvalidArgumentError, ResourceLimitError,
                     StructuralFailureError, UnsupportedCaseError,
                     candidate_budget)
from .groups import FinAbGroup, make_group


# ---------------------------------------------------------------------------
# translations


@dataclass(frozen=True)
class Translation:
    """Ground bijection acting on codimension-`height` faces of cubes."""

    mapping: tuple[tuple, ...]  # sorted (point, image) pairs
    height: int

    @classmethod
    def from_dict(cls, table: dict, height: int) -> "Translation":
        return cls(tuple(sorted(table.items())), height)

    @property
    def table(self) -> dict:
        return dict(self.mapping)

    def __call__(self, point):
        return self.table[point]


def _default_check_dim(N: Cubespace, i: int) -> int:
    step = N.step_hint if N.step_hint is not None else 2
    return min(N.n_max, max(i, step + 1))


def translation_violation(alpha, N: Cubespace, i: int,
                          check_dim: int | None = None,
                          budget: int | None = None):
    """First (n, face, cube) where acting with alpha leaves the cube set, or None."""
    if i < 1:
        raise InvalidArgumentError("height must be >= 1")
    table = normalize_map(alpha, N, N)
    if len(set(table.values())) != len(N.ground):
        return (0, None, None)  # not a bijection
    check_dim = _default_check_dim(N, i) if check_dim is None else check_dim
    for n in range(i, check_dim + 1):
        if isinstance(N, DegreeProductSpace):
            # cube sets are subgroups: acting on face F changes a cube by a map
            # supported on F that depends only on the face restriction, and all
            # restrictions of cubes to a d-face are exactly the d-cubes
            for face in enumerate_faces(n, i):
                for r in N.enumerate_cubes(n - i, budget):
                    delta = [N.group.zero] * (1 << n)
                    for w, vertex in enumerate(face.vertices):
                        delta[vertex] = N.point_sub(table[r[w]], r[w])
                    if not N.member(n, tuple(delta)):
                        return (n, face, r)
        else:
            cubes = list(N.enumerate_cubes(n, budget))
            for face in enumerate_faces(n, i):
                fv = set(face.vertices)
                for c in cubes:
                    acted = tuple(table[c[v]] if v in fv else c[v]
                                  for v in range(1 << n))
                    if not N.member(n, acted):
                        return (n, face, c)
    return None


def is_translation(alpha, N: Cubespace, i: int, check_dim: int | None = None,
                   budget: int | None = None) -> bool:
    return translation_violation(alpha, N, i, check_dim, budget) is None


@dataclass
class TransGroup:
    """All height-i translations of a space, with closure certificates."""

    space: Cubespace
    height: int
    translations: list[Translation]
    closure_ok: bool
    higher_contained: bool  # Trans_{i+1} subset of Trans_i
    candidates_checked: int

    def tables(self) -> list[dict]:
        return [t.table for t in self.translations]


def trans_group(N: Cubespace, i: int, budget: int | None = None,
                check_dim: int | None = None) -> TransGroup:
    """Brute-force search for all height-i translations over every ground bijection.

    Also verifies closure under composition and inverse, and that the
    height-(i+1) translations (from the same candidate sweep) are contained in
    the height-i ones.
    """
    cap = candidate_budget(budget)
    g = len(N.ground)
    total = math.factorial(g)
    if total > cap:
        raise ResourceLimitError(f"{total} bijections exceed budget {cap}",
                                 needed=total, budget=cap)
    found: list[dict] = []
    higher: list[dict] = []
    for perm in itertools.permutations(N.ground):
        table = dict(zip(N.ground, perm))
        if is_translation(table, N, i, check_dim, budget):
            found.append(table)
        if is_translation(table, N, i + 1, check_dim, budget):
            higher.append(table)
    keyed = {tuple(sorted(t.items())) for t in found}
    closure_ok = True
    for a in found:
        inv = {v: k for k, v in a.items()}
        if tuple(sorted(inv.items())) not in keyed:
            closure_ok = False
        for b in found:
            comp = {x: a[b[x]] for x in b}
            if tuple(sorted(comp.items())) not in keyed:
                closure_ok = False
    higher_contained = all(tuple(sorted(t.items())) in keyed for t in higher)
    return TransGroup(space=N, height=i,
                      translations=[Translation.from_dict(t, i) for t in found],
                      closure_ok=closure_ok, higher_contained=higher_contained,
                      candidates_checked=total)


# ---------------------------------------------------------------------------
# extensions


@dataclass
class Extension:
    """Certified degree-k abelian bundle over a base cubespace."""

    total: Cubespace
    base: Cubespace
    group: FinAbGroup
    proj: dict
    degree: int
    action: object  # callable (group coords, total point) -> total point
    fibers: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)

    def fiber(self, base_point) -> list:
        return self.fibers[base_point]

    def difference(self, x, y):
        """The unique group element a with action(a, y) = x; x, y in one fiber."""
        for a in self.group.elements:
            if self.action(a, y) == x:
                return a
        raise InvalidArgumentError("points are not in a common fiber orbit")


def verify_extension(total: Cubespace, base: Cubespace, group: FinAbGroup,
                     proj, k: int, action, n_upto: int | None = None,
                     budget: int | None = None) -> Extension:
    """Certify a degree-k extension exhaustively up to n_upto.

    Checks the bundle data (fibers of size |group| with a free transitive
    action), that every base cube lifts to a total cube, and that the member
    lifts over a base cube are exactly one lift shifted by the degree-k
    structure cubes of the fiber group.
    """
    cap = candidate_budget(budget)
    proj = normalize_map(proj, total, base)
    n_upto = min(3, total.n_max, base.n_max) if n_upto is None else n_upto
    fibers: dict = {b: [] for b in base.ground}
    for x in total.ground:
        fibers[proj[x]].append(x)
    for b, fib in fibers.items():
        if len(fib) != group.order:
            raise StructuralFailureError(
                f"fiber over {b!r} has size {len(fib)}, expected {group.order}",
                witness=b)
    zero = group.zero
    for x in total.ground:
        if action(zero, x) != x:
            raise StructuralFailureError("zero must act trivially", witness=x)
        orbit = {action(a, x) for a in group.elements}
        if len(orbit) != group.order or set(fibers[proj[x]]) != orbit:
            raise StructuralFailureError(
                "action is not free and transitive on the fiber", witness=x)
        for a in group.elements:
            for bb in group.elements:
                if action(a, action(bb, x)) != action(group.add(a, bb), x):
                    raise StructuralFailureError("action is not additive",
                                                 witness=(a, bb, x))
    dk = dk_structure(group, k) if group.order > 1 else None
    lifts_checked = 0
    for n in range(1, n_upto + 1):
        base_set = set(base.enumerate_cubes(n, cap))
        grouped: dict = {}
        for c in total.enumerate_cubes(n, cap):
            grouped.setdefault(tuple(proj[x] for x in c), []).append(c)
        if set(grouped) != base_set:
            missing = base_set - set(grouped)
            raise StructuralFailureError(
                f"{len(missing)} base cubes have no lift at dimension {n}",
                witness=next(iter(missing)) if missing else None)
        size = 1 << n
        for base_cube, lifts in grouped.items():
            rep = lifts[0]
            member_set = set(lifts)
            candidates = group.order ** size
            if candidates > cap:
                raise ResourceLimitError(
                    f"{candidates} fiber shifts exceed budget {cap}",
                    needed=candidates, budget=cap, dimension=n)
            expected = set()
            for gmap in itertools.product(group.elements, repeat=size):
                shifted = tuple(action(gmap[v], rep[v]) for v in range(size))
                is_dk = dk.member(n, gmap) if dk is not None else \
                    all(gv == zero for gv in gmap)
                if is_dk:
                    expected.add(shifted)
                if (shifted in member_set) != is_dk:
                    raise StructuralFailureError(
                        f"lift fiber mismatch over {base_cube!r} at dimension {n}",
                        witness=(rep, gmap))
            if expected != member_set:
                raise StructuralFailureError(
                    f"lift fiber is not a degree-{k} coset at dimension {n}",
                    witness=base_cube)
            lifts_checked += len(lifts)
    return Extension(total=total, base=base, group=group, proj=proj, degree=k,
                     action=action, fibers=fibers,
                     certificate={"n_upto": n_upto, "lifts_checked": lifts_checked})


def trivial_extension(N: Cubespace, A: FinAbGroup, k: int,
                      n_upto: int | None = None,
                      budget: int | None = None) -> Extension:
    """The product extension N x D_k(A) with coordinate projection."""
    from .cubespace import product as space_product
    fiber_space = dk_structure(A, k)
    if isinstance(N, DegreeProductSpace):
        total = space_product(N, fiber_space)
        ncomp = len(N.components)
        proj = {pt: pt[:ncomp] for pt in total.ground}

        def action(a, pt):
            shifted = fiber_space.point_add(pt[ncomp:], a)
            return pt[:ncomp] + shifted
    else:
        total = space_product(N, fiber_space)
        proj = {pt: pt[0] for pt in total.ground}

        def action(a, pt):
            return (pt[0], fiber_space.point_add(pt[1], a))
    return verify_extension(total, N, A, proj, k, action, n_upto, budget)


def cyclic_quotient_extension(total_orders, base_orders, k: int,
                              n_upto: int | None = None,
                              budget: int | None = None) -> Extension:
    """Componentwise reduction D_k(prod Z_M) -> D_k(prod Z_m), m | M.

    The kernel embeds as the multiples of m in each component; the fiber group
    is the product of Z_{M/m}.
    """
    total_orders = [int(x) for x in total_orders]
    base_orders = [int(x) for x in base_orders]
    if len(total_orders) != len(base_orders) or any(
            M % m for M, m in zip(total_orders, base_orders)):
        raise InvalidArgumentError("base orders must divide total orders")
    total = dk_structure(make_group(total_orders), k)
    base = dk_structure(make_group(base_orders), k)
    group = make_group([M // m for M, m in zip(total_orders, base_orders)])
    proj = {pt: tuple(c % m for c, m in zip(pt, base_orders))
            for pt in total.ground}

    def action(a, pt):
        return tuple((c + ai * m) % M for c, ai, m, M in
                     zip(pt, a, base_orders, total_orders))

    return verify_extension(total, base, group, proj, k, action, n_upto, budget)


@dataclass
class SectionSearchResult:
    """Outcome of the split-section search: a witness or an exhaustion certificate."""

    section: dict | None
    candidates_checked: int
    exhausted: bool
    n_upto: int

    @property
    def found(self) -> bool:
        return self.section is not None


def find_section(ext: Extension, n_upto: int | None = None,
                 budget: int | None = None) -> SectionSearchResult:
    """Search for a cube-preserving section of the extension's projection.

    Candidates pick one fiber point per base point, fiber points ordered by
    ground index; the first candidate that is a morphism wins (deterministic).
    Returns an exhaustion certificate when no candidate verifies.
    """
    cap = candidate_budget(budget)
    n_upto = min(3, ext.base.n_max, ext.total.n_max, ext.degree + 1) \
        if n_upto is None else n_upto
    order = {x: i for i, x in enumerate(ext.total.ground)}
    fibers = [sorted(ext.fibers[b], key=order.__getitem__)
              for b in ext.base.ground]
    total_candidates = math.prod(len(f) for f in fibers)
    if total_candidates > cap:
        raise ResourceLimitError(
            f"{total_candidates} section candidates exceed budget {cap}",
            needed=total_candidates, budget=cap)
    checked = 0
    for choice in itertools.product(*fibers):
        checked += 1
        section = dict(zip(ext.base.ground, choice))
        if is_morphism(section, ext.base, ext.total, n_upto=n_upto,
                       budget=budget):
            return SectionSearchResult(section=section,
                                       candidates_checked=checked,
                                       exhausted=False, n_upto=n_upto)
    return SectionSearchResult(section=None, candidates_checked=checked,
                               exhausted=True, n_upto=n_upto)


# ---------------------------------------------------------------------------
# arrow spaces and translation bundles


class ArrowSpace(Cubespace):
    """Cubespace on N x N whose cubes glue into cubes of N through the i-fold arrow."""

    def __init__(self, base: Cubespace, index: int, ground=None):
        if index < 1:
            raise InvalidArgumentError("arrow index must be >= 1")
        if base.n_max <= index:
            raise InvalidArgumentError("base oracle too shallow for this arrow")
        self.arrow_base = base
        self.index = index
        pts = ground if ground is not None else \
            [(x, y) for x in base.ground for y in base.ground]
        super().__init__(pts, n_max=base.n_max - index, step_hint=None)

    def glue(self, n: int, cube):
        """The (n+index)-dimensional map built from the pair components."""
        i = self.index
        top = (1 << i) - 1
        size = 1 << (n + i)
        out = [None] * size
        for v in range(1 << n):
            x, y = cube[v]
            for w in range(1 << i):
                out[v | (w << n)] = y if w == top else x
        return tuple(out)

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        if any(p not in self._ground_index for p in cube):
            return False
        return self.arrow_base.member(n + self.index, self.glue(n, cube))

    def enumerate_cubes(self, n: int, budget: int | None = None):
        # arrow cubes are exactly the big cubes constant across the non-top
        # arrow slices; read them off the base enumeration
        i = self.index
        top = (1 << i) - 1
        for big in self.arrow_base.enumerate_cubes(n + i, budget):
            ok = True
            pairs = []
            for v in range(1 << n):
                slices = {big[v | (w << n)] for w in range(1 << i) if w != top}
                if len(slices) != 1:
                    ok = False
                    break
                pairs.append((slices.pop(), big[v | (top << n)]))
            if ok:
                cube = tuple(pairs)
                if all(p in self._ground_index for p in cube):
                    yield cube


def arrow_space(N: Cubespace, i: int) -> ArrowSpace:
    return ArrowSpace(N, i)


@dataclass
class TranslationBundle:
    """Arrow subspace over a base translation plus its certified extension."""

    arrow: ArrowSpace
    tstar: Cubespace
    extension: Extension


def translation_bundle(alpha, N: Cubespace, i: int, k: int | None = None,
                       budget: int | None = None) -> TranslationBundle:
    """Build the arrow subspace of a lifted translation problem and certify
    its factor as a degree k-i extension of the (k-1)-st factor of N.

    Refuses the degenerate case k = i, which the construction does not cover.
    """
    from .bundles import factor_nilspace, structure_group
    k = k if k is not None else N.step_hint
    if k is None:
        raise InvalidArgumentError("step unknown; pass k")
    if k < i + 1:
        raise UnsupportedCaseError("arrow construction needs step >= height + 1")
    Fk1, proj = factor_nilspace(N, k - 1, budget=budget)
    alpha = normalize_map(alpha, Fk1, Fk1)
    if not is_translation(alpha, Fk1, i, budget=budget):
        raise InvalidArgumentError("alpha is not a height-i translation of the factor")
    ground = [(x, y) for x in N.ground for y in N.ground
              if alpha[proj[x]] == proj[y]]
    T = ArrowSpace(N, i, ground=ground)
    for p in T.ground:
        for q in T.ground:
            if not T.member(1, (p, q)):
                raise StructuralFailureError(
                    "arrow subspace is not ergodic at this scale", witness=(p, q))
    tstar, tproj = factor_nilspace(T, k - 1, budget=budget)
    sg = structure_group(N, k, k=k, budget=budget)
    tau = {}
    for cls in tstar.ground:
        images = {proj[x] for (x, y) in cls}
        if len(images) != 1:
            raise StructuralFailureError(
                "arrow classes do not project to single factor points",
                witness=cls)
        tau[cls] = images.pop()

    class_of = tstar.class_of if hasattr(tstar, "class_of") else None

    def action(a, cls):
        x, y = cls[0]
        moved = (x, sg.act(a, y))
        target = class_of[moved]
        # consistency: every representative moves into the same class
        for (xx, yy) in cls:
            if class_of[(xx, sg.act(a, yy))] != target:
                raise StructuralFailureError(
                    "fiber action is inconsistent on an arrow class",
                    witness=cls)
        return target

    extension = verify_extension(tstar, Fk1, sg.group, tau, k - i, action,
                                 budget=budget)
    return TranslationBundle(arrow=T, tstar=tstar, extension=extension)


@dataclass
class TranslationLift:
    """Outcome of a translation-lifting search."""

    lift: Translation | None
    candidates_checked: int
    exhausted: bool
    strategy: str

    @property
    def found(self) -> bool:
        return self.lift is not None


def lift_translation(alpha, ext: Extension, i: int,
                     budget: int | None = None) -> TranslationLift:
    """Lift a base translation through an extension, or certify exhaustion.

    Candidates assign to each total point a fiber point over the translated
    base image (lexicographic by ground index); every candidate satisfying the
    commuting identity is tested with the full translation check, and the first
    verified lift is returned.
    """
    cap = candidate_budget(budget)
    alpha = normalize_map(alpha, ext.base, ext.base)
    if not is_translation(alpha, ext.base, i, budget=budget):
        raise InvalidArgumentError("alpha is not a height-i translation of the base")
    order = {x: j for j, x in enumerate(ext.total.ground)}
    targets = [sorted(ext.fibers[alpha[ext.proj[x]]], key=order.__getitem__)
               for x in ext.total.ground]
    total_candidates = math.prod(len(t) for t in targets)
    if total_candidates > cap:
        raise ResourceLimitError(
            f"{total_candidates} lift candidates exceed budget {cap}",
            needed=total_candidates, budget=cap)
    checked = 0
    for choice in itertools.product(*targets):
        checked += 1
        if len(set(choice)) != len(choice):
            continue
        beta = dict(zip(ext.total.ground, choice))
        if is_translation(beta, ext.total, i, budget=budget):
            return TranslationLift(lift=Translation.from_dict(beta, i),
                                   candidates_checked=checked,
                                   exhausted=False, strategy="search")
    return TranslationLift(lift=None, candidates_checked=checked,
                           exhausted=True, strategy="search")


def lift_translation_via_bundle(alpha, N: Cubespace, i: int,
                                k: int | None = None,
                                budget: int | None = None) -> TranslationLift:
    """Section-driven lift through the canonical factor tower of N.

    Builds the arrow bundle, splits it, reads the lift off the section classes
    (within a class, a first coordinate determines its partner), then re-runs
    the full translation verification on the result.
    """
    bundle = translation_bundle(alpha, N, i, k=k, budget=budget)
    sec = find_section(bundle.extension, budget=budget)
    if not sec.found:
        return TranslationLift(lift=None,
                               candidates_checked=sec.candidates_checked,
                               exhausted=sec.exhausted, strategy="section")
    from .bundles import factor_nilspace
    kk = k if k is not None else N.step_hint
    _, proj = factor_nilspace(N, kk - 1, budget=budget)
    beta = {}
    for x in N.ground:
        cls = sec.section[proj[x]]
        partners = [y for (xx, y) in cls if xx == x]
        if len(partners) != 1:
            raise StructuralFailureError(
                "section class does not determine a unique partner", witness=x)
        beta[x] = partners[0]
    if len(set(beta.values())) != len(N.ground) or \
            not is_translation(beta, N, i, budget=budget):
        raise StructuralFailureError("section-derived map failed verification",
                                     witness=beta)
    return TranslationLift(lift=Translation.from_dict(beta, i),
                           candidates_checked=sec.candidates_checked,
                           exhausted=False, strategy="section")


# ---------------------------------------------------------------------------
# the cube-by-cube action engine


def integer_degree_member(n: int, values, degree: int) -> bool:
    """Membership of an integer-valued map in the degree-i structure over Z."""
    coeffs = [int(v) for v in values]
    for b in range(n):
        bit = 1 << b
        for mask in range(1 << n):
            if mask & bit:
                coeffs[mask] -= coeffs[mask ^ bit]
    return all(coeffs[mask] == 0 for mask in range(1 << n)
               if popcount(mask) > degree)


def cube_action(f, c, alpha: Translation, N: Cubespace):
    """Apply alpha to a cube pointwise with integer multiplicities from c.

    c must be an integer-valued cube of the appropriate degree structure over
    the integers (degree = alpha.height); the acted map is verified to be a
    cube and returned.
    """
    f = tuple(f)
    c = tuple(int(x) for x in c)
    if len(f) != len(c):
        raise InvalidArgumentError("cube and exponent map sizes differ")
    n = (len(f)).bit_length() - 1
    if not integer_degree_member(n, c, alpha.height):
        raise InvalidArgumentError(
            "exponent map is not a cube of the integer degree structure")
    if not N.member(n, f):
        raise InvalidArgumentError("f is not a cube")
    table = alpha.table
    inverse = {v: k for k, v in table.items()}
    acted = []
    for v in range(1 << n):
        x = f[v]
        m = c[v]
        step = table if m >= 0 else inverse
        for _ in range(abs(m)):
            x = step[x]
        acted.append(x)
    acted = tuple(acted)
    if not N.member(n, acted):
        raise StructuralFailureError(
            "acted map left the cube set; the translation or exponent cube is "
            "invalid", witness=(f, c))
    return acted
