"""Cube structures on finite ground sets, driven by membership oracles.

A `Cubespace` answers "is this map {0,1}^n -> ground a cube?" up to `n_max`.
Cube sets are never stored; they are materialized on demand and only within an
enumeration budget.  The degree structures on abelian groups are decided by a
spanning set of alternating-sum constraints: a map is a cube of the k-degree
structure iff its multilinear (Mobius) coefficients of degree > k vanish.  The
full morphism-driven definition is kept as `alternating_sum_member` and serves
as the independent cross-check oracle in the tests.

Cube maps are tuples of ground points of length 2^n, indexed by vertex bitmask.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cubes import (CubeMorphism, corner_vertices, enumerate_cube_morphisms,
                    popcount)
from .errors import (InvalidArgumentError, InvalidCornerError,
                     ResourceLimitError, candidate_budget)
from .groups import FinAbGroup, make_group
from .zlinalg import subgroup_order


@lru_cache(maxsize=None)
def masks_upto(n: int, k: int) -> tuple[int, ...]:
    """Vertex masks of {0,1}^n with at most k bits set, in increasing order."""
    return tuple(m for m in range(1 << n) if popcount(m) <= k)


def mobius_coefficients(values, n: int, modulus: int) -> list[int]:
    """Multilinear coefficients a_S with f(v) = sum_{S subset v} a_S (mod modulus)."""
    a = [v % modulus for v in values]
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                a[mask] = (a[mask] - a[mask ^ bit]) % modulus
    return a


class Cubespace:
    """Finite ground set plus a per-dimension cube membership oracle."""

    def __init__(self, ground, n_max: int = 4, step_hint: int | None = None):
        self.ground = tuple(ground)
        if not self.ground:
            raise InvalidArgumentError("ground set must be nonempty")
        self.n_max = n_max
        self.step_hint = step_hint
        self._ground_index = {x: i for i, x in enumerate(self.ground)}

    def member(self, n: int, cube) -> bool:
        raise NotImplementedError

    def _check_query(self, n: int, cube):
        if n > self.n_max:
            raise InvalidArgumentError(f"oracle answers only up to n_max={self.n_max}")
        if len(cube) != 1 << n:
            raise InvalidArgumentError("cube must assign one point per vertex mask")

    def enumerate_cubes(self, n: int, budget: int | None = None):
        """Brute-force enumeration: filter all |ground|^(2^n) maps."""
        cap = candidate_budget(budget)
        total = len(self.ground) ** (1 << n)
        if total > cap:
            raise ResourceLimitError(
                f"{total} candidate maps exceed budget {cap}",
                needed=total, budget=cap, dimension=n)
        for cube in itertools.product(self.ground, repeat=1 << n):
            if self.member(n, cube):
                yield cube

    def cube_set(self, n: int, budget: int | None = None) -> frozenset:
        return frozenset(self.enumerate_cubes(n, budget))

    def index_of(self, point) -> int:
        return self._ground_index[point]


class DegreeProductSpace(Cubespace):
    """Product of cyclic-component degree structures.

    Component j is a pair (modulus m_j, degree k_j); the ground set is the
    product group and a map is a cube iff each component has multilinear degree
    at most k_j.  Cube sets are subgroups, which unlocks exact axiom checks.
    """

    def __init__(self, components, n_max: int = 6):
        comps = tuple((int(m), int(k)) for m, k in components)
        for m, k in comps:
            if m < 1 or k < 0:
                raise InvalidArgumentError("need modulus >= 1 and degree >= 0")
        self.components = comps
        ground = itertools.product(*[range(m) for m, _ in comps])
        step = max((k for m, k in comps if m > 1), default=0)
        super().__init__([tuple(x) for x in ground], n_max=n_max, step_hint=step)
        self.group = make_group([m for m, _ in comps])

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        for j, (m, k) in enumerate(self.components):
            if m == 1 or n <= k:
                continue
            coeffs = mobius_coefficients([pt[j] for pt in cube], n, m)
            if any(coeffs[mask] for mask in range(1 << n) if popcount(mask) > k):
                return False
        return True

    def cube_count(self, n: int) -> int:
        return math.prod(m ** len(masks_upto(n, k)) for m, k in self.components)

    def enumerate_cubes(self, n: int, budget: int | None = None):
        cap = candidate_budget(budget)
        total = self.cube_count(n)
        if total > cap:
            raise ResourceLimitError(
                f"{total} cubes exceed budget {cap}",
                needed=total, budget=cap, dimension=n)
        size = 1 << n
        if not self.components:
            yield tuple(() for _ in range(size))
            return
        per_component = []
        for m, k in self.components:
            sel = masks_upto(n, k)
            tables = []
            for coeffs in itertools.product(range(m), repeat=len(sel)):
                vals = [0] * size
                for a, s in zip(coeffs, sel):
                    if a:
                        for v in range(size):
                            if s & v == s:
                                vals[v] = (vals[v] + a) % m
                tables.append(tuple(vals))
            per_component.append(tables)
        for combo in itertools.product(*per_component):
            yield tuple(zip(*combo))

    def cube_generators(self, n: int) -> list[tuple]:
        """Subgroup generators of C^n: one monomial cube per component and mask."""
        gens = []
        size = 1 << n
        ncomp = len(self.components)
        for j, (m, k) in enumerate(self.components):
            if m == 1:
                continue
            for s in masks_upto(n, k):
                cube = []
                for v in range(size):
                    pt = [0] * ncomp
                    if s & v == s:
                        pt[j] = 1
                    cube.append(tuple(pt))
                gens.append(tuple(cube))
        return gens

    def point_add(self, x, y):
        return tuple((a + b) % m for a, b, (m, _) in zip(x, y, self.components))

    def point_sub(self, x, y):
        return tuple((a - b) % m for a, b, (m, _) in zip(x, y, self.components))


def dk_structure(A: FinAbGroup, k: int) -> DegreeProductSpace:
    """Degree-k structure on A: cubes are maps whose alternating sums over all
    (k+1)-dimensional cube-morphism images vanish."""
    if k < 1:
        raise InvalidArgumentError("degree must be >= 1")
    return DegreeProductSpace([(m, k) for m in A.cyclic_orders])


def linear_structure(A: FinAbGroup) -> DegreeProductSpace:
    """Affine cube structure on A; coincides with the degree-1 structure."""
    return DegreeProductSpace([(m, 1) for m in A.cyclic_orders])


def point_space() -> DegreeProductSpace:
    return DegreeProductSpace([])


def alternating_sum_member(A: FinAbGroup, k: int, n: int, cube) -> bool:
    """Full-enumeration membership oracle for the degree-k structure.

    Iterates every cube morphism {0,1}^(k+1) -> {0,1}^n and checks that the
    signed sum of the composed map vanishes; exponentially slower than the
    spanning-set test and kept as its cross-check.
    """
    coords = [A.reduce(pt) for pt in cube]
    for psi in enumerate_cube_morphisms(k + 1, n):
        acc = A.zero
        for v in range(1 << (k + 1)):
            term = coords[psi.apply_mask(v)]
            if popcount(v) & 1:
                acc = A.sub(acc, term)
            else:
                acc = A.add(acc, term)
        if acc != A.zero:
            return False
    return True


class PairProductSpace(Cubespace):
    """Product of two generic cubespaces; points are pairs."""

    def __init__(self, left: Cubespace, right: Cubespace):
        self.left, self.right = left, right
        ground = [(a, b) for a in left.ground for b in right.ground]
        step = None
        if left.step_hint is not None and right.step_hint is not None:
            step = max(left.step_hint, right.step_hint)
        super().__init__(ground, n_max=min(left.n_max, right.n_max), step_hint=step)

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        return (self.left.member(n, tuple(p[0] for p in cube))
                and self.right.member(n, tuple(p[1] for p in cube)))

    def enumerate_cubes(self, n: int, budget: int | None = None):
        rights = list(self.right.enumerate_cubes(n, budget))
        for cl in self.left.enumerate_cubes(n, budget):
            for cr in rights:
                yield tuple(zip(cl, cr))


def product(N1: Cubespace, N2: Cubespace) -> Cubespace:
    """Product cubespace; degree-structured factors flatten into one module space."""
    if isinstance(N1, DegreeProductSpace) and isinstance(N2, DegreeProductSpace):
        return DegreeProductSpace(N1.components + N2.components,
                                  n_max=min(N1.n_max, N2.n_max))
    return PairProductSpace(N1, N2)


class SubdirectProductSpace(Cubespace):
    """Pairs agreeing through projections onto a common factor; cubes are
    componentwise member pairs."""

    def __init__(self, N: Cubespace, K: Cubespace, p1, p2, factor: Cubespace,
                 check: bool = True, n_upto: int = 3):
        p1 = normalize_map(p1, N, factor)
        p2 = normalize_map(p2, K, factor)
        if check:
            for f, src in ((p1, N), (p2, K)):
                if not is_morphism(f, src, factor, n_upto=min(n_upto, src.n_max,
                                                              factor.n_max)):
                    raise InvalidArgumentError("projections must be morphisms")
        self.left, self.right = N, K
        self.p1, self.p2 = p1, p2
        ground = [(a, b) for a in N.ground for b in K.ground if p1[a] == p2[b]]
        super().__init__(ground, n_max=min(N.n_max, K.n_max),
                         step_hint=None)

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        return (self.left.member(n, tuple(p[0] for p in cube))
                and self.right.member(n, tuple(p[1] for p in cube)))

    def enumerate_cubes(self, n: int, budget: int | None = None):
        rights = list(self.right.enumerate_cubes(n, budget))
        for cl in self.left.enumerate_cubes(n, budget):
            want = tuple(self.p1[x] for x in cl)
            for cr in rights:
                if tuple(self.p2[y] for y in cr) == want:
                    yield tuple(zip(cl, cr))


def subdirect_product(N: Cubespace, K: Cubespace, p1, p2,
                      factor: Cubespace) -> SubdirectProductSpace:
    return SubdirectProductSpace(N, K, p1, p2, factor)


class ExplicitCubespace(Cubespace):
    """Cube sets given explicitly per dimension; test scaffolding for toy oracles."""

    def __init__(self, ground, cube_sets: dict[int, set], n_max: int = 3):
        super().__init__(ground, n_max=n_max)
        self.cube_sets = {n: {tuple(c) for c in cs} for n, cs in cube_sets.items()}

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        return tuple(cube) in self.cube_sets.get(n, set())


def constant_only_space(points, n_max: int = 3) -> ExplicitCubespace:
    """Only constant maps are cubes; violates ergodicity for |ground| > 1."""
    sets = {n: {tuple([p] * (1 << n)) for p in points} for n in range(1, n_max + 1)}
    return ExplicitCubespace(points, sets, n_max=n_max)


class RelabeledSpace(Cubespace):
    """Image of a cubespace under a ground-set bijection."""

    def __init__(self, base: Cubespace, relabel: dict):
        if set(relabel) != set(base.ground) or \
                len(set(relabel.values())) != len(base.ground):
            raise InvalidArgumentError("relabeling must be a bijection on ground")
        self.base = base
        self.relabel = dict(relabel)
        self.unlabel = {v: k for k, v in relabel.items()}
        super().__init__([relabel[x] for x in base.ground], n_max=base.n_max,
                         step_hint=base.step_hint)

    def member(self, n: int, cube) -> bool:
        self._check_query(n, cube)
        return self.base.member(n, tuple(self.unlabel[p] for p in cube))

    def enumerate_cubes(self, n: int, budget: int | None = None):
        for c in self.base.enumerate_cubes(n, budget):
            yield tuple(self.relabel[p] for p in c)


# ---------------------------------------------------------------------------
# axiom checking


@dataclass
class AxiomReport:
    """Outcome of the exhaustive axiom verification up to n_upto."""

    n_upto: int
    composition_ok: dict[int, bool]
    ergodic_ok: bool
    gluing_ok: dict[int, bool]
    completion_counts: dict[int, int | None]
    kstep: int | None
    counterexample: tuple | None
    notes: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return (self.ergodic_ok and all(self.composition_ok.values())
                and all(self.gluing_ok.values()))


def _corner_face_tables(n: int):
    """For each coordinate l: masks of the (n-1)-face {v_l = 0}, in face order."""
    tables = []
    for l in range(n):
        rows = []
        for w in range(1 << (n - 1)):
            low = w & ((1 << l) - 1)
            high = (w >> l) << (l + 1)
            rows.append(low | high)
        tables.append(rows)
    return tables


def _composition_family(N: Cubespace, m: int, budget: int):
    if isinstance(N, DegreeProductSpace):
        return N.cube_generators(m), "generators"
    return list(N.enumerate_cubes(m, budget)), "all-cubes"


def _exact_gluing(N: DegreeProductSpace, n: int):
    """Exact gluing check per component via subgroup orders.

    Precondition corners form the kernel K of the degree constraints visible on
    the faces through 0; cube restrictions form the span R of the restricted
    monomial generators.  Gluing holds iff K = R, and then every completable
    corner has exactly |C^n| / |R| completions (restriction is a group hom, so
    its fibers share one size).
    """
    size = 1 << n
    corner = size - 1  # masks 0 .. size-2; the full mask is the open vertex
    count = 1
    for m, k in N.components:
        if m == 1:
            continue
        # constraint rows: Mobius coefficient a_S for proper masks S with |S| > k
        constraint_cols = []
        for s in range(size - 1):
            if popcount(s) > k:
                col = [0] * corner
                for t in range(size - 1):
                    if t & s == t:
                        col[t] = (-1) ** (popcount(s) - popcount(t))
                constraint_cols.append(col)
        if constraint_cols:
            # image of the constraint map is spanned by its columns-as-rows
            transposed = [[constraint_cols[c][t] for c in range(len(constraint_cols))]
                          for t in range(corner)]
            image = subgroup_order(transposed, [m] * len(constraint_cols))
            k_order = (m ** corner) // image
        else:
            k_order = m ** corner
        monomials = [[1 if (s & v) == s else 0 for v in range(size)]
                     for s in masks_upto(n, k)]
        cube_order = subgroup_order(monomials, [m] * size)
        restricted = [row[:corner] for row in monomials]
        r_order = subgroup_order(restricted, [m] * corner)
        # restrictions always satisfy the face constraints
        for row in restricted:
            for col in constraint_cols:
                acc = sum(a * b for a, b in zip(row, col))
                if acc % m:
                    return False, None
        if k_order != r_order:
            return False, None
        count *= cube_order // r_order
    return True, count


def _brute_gluing(N: Cubespace, n: int, budget: int):
    """Enumerate corner maps, test the face precondition, count completions."""
    g = len(N.ground)
    total = g ** ((1 << n) - 1)
    if total > budget:
        raise ResourceLimitError(
            f"{total} corner maps exceed budget {budget}",
            needed=total, budget=budget, dimension=n)
    faces = _corner_face_tables(n)
    counts = set()
    for corner in itertools.product(N.ground, repeat=(1 << n) - 1):
        ok = all(N.member(n - 1, tuple(corner[v] for v in face))
                 for face in faces) if n > 1 else True
        if not ok:
            continue
        c = sum(1 for x in N.ground if N.member(n, corner + (x,)))
        if c == 0:
            return False, None, corner
        counts.add(c)
    if not counts:
        return True, None, None
    if len(counts) == 1:
        return True, counts.pop(), None
    # gluing held but the completion count is not a single number
    return True, None, None


def check_axioms(N: Cubespace, n_upto: int, budget: int | None = None) -> AxiomReport:
    """Exhaustively verify composition, ergodicity, and gluing up to n_upto.

    Composition runs over every cube morphism with source and target dimension
    at most n_upto.  On degree-structured spaces the cube family is the
    subgroup generator set (composition acts linearly, so generators decide the
    whole cube group); on generic oracles it is the full enumerated cube set.
    The step is read off the completion counts: unique completion first at
    dimension k+1.
    """
    if n_upto > N.n_max:
        raise InvalidArgumentError("n_upto exceeds the oracle's n_max")
    cap = candidate_budget(budget)
    counterexample = None
    notes: dict = {"family_mode": {}}

    ergodic_ok = all(N.member(1, (x, y)) for x in N.ground for y in N.ground)
    if not ergodic_ok and counterexample is None:
        bad = next(((x, y) for x in N.ground for y in N.ground
                    if not N.member(1, (x, y))))
        counterexample = ("ergodicity", 1, bad, None)

    composition_ok: dict[int, bool] = {}
    for m in range(1, n_upto + 1):
        family, mode = _composition_family(N, m, cap)
        notes["family_mode"][m] = mode
        ok = True
        for n in range(1, n_upto + 1):
            for psi in enumerate_cube_morphisms(n, m):
                table = psi.vertex_table
                for f in family:
                    composed = tuple(f[t] for t in table)
                    if not N.member(n, composed):
                        ok = False
                        if counterexample is None:
                            counterexample = ("composition", n, composed, psi)
                        break
                if not ok:
                    break
            if not ok:
                break
        composition_ok[m] = ok

    gluing_ok: dict[int, bool] = {}
    completion_counts: dict[int, int | None] = {}
    for n in range(1, n_upto + 1):
        if isinstance(N, DegreeProductSpace):
            ok, count = _exact_gluing(N, n)
            witness = None
            notes.setdefault("gluing_mode", {})[n] = "exact-subgroup"
        else:
            ok, count, witness = _brute_gluing(N, n, cap)
            notes.setdefault("gluing_mode", {})[n] = "brute"
        gluing_ok[n] = ok
        completion_counts[n] = count
        if not ok and counterexample is None:
            counterexample = ("gluing", n, witness, None)

    kstep = None
    if all(gluing_ok.values()):
        nonunique = [n for n, c in completion_counts.items()
                     if c is not None and c > 1]
        unique = [n for n, c in completion_counts.items() if c == 1]
        if not nonunique and len(unique) == n_upto:
            kstep = 0
        elif nonunique:
            k = max(nonunique)
            if all(completion_counts.get(n) == 1 for n in range(k + 1, n_upto + 1)) \
                    and k < n_upto:
                kstep = k
            else:
                notes["step"] = f"not settled below n_upto={n_upto}"

    return AxiomReport(n_upto=n_upto, composition_ok=composition_ok,
                       ergodic_ok=ergodic_ok, gluing_ok=gluing_ok,
                       completion_counts=completion_counts, kstep=kstep,
                       counterexample=counterexample, notes=notes)


def completion_count(N: Cubespace, corner, n: int | None = None) -> int:
    """Number of values closing a corner map into a cube.

    The corner lists values on every vertex mask except the all-ones vertex;
    its restriction to each face through 0 must already be a cube.
    """
    corner = tuple(corner)
    if n is None:
        n = (len(corner) + 1).bit_length() - 1
    if len(corner) != (1 << n) - 1:
        raise InvalidArgumentError("corner must cover all masks but the top one")
    if n > 1:
        for face in _corner_face_tables(n):
            if not N.member(n - 1, tuple(corner[v] for v in face)):
                raise InvalidCornerError("corner face is not a cube")
    return sum(1 for x in N.ground if N.member(n, corner + (x,)))


# ---------------------------------------------------------------------------
# morphisms


def normalize_map(f, src: Cubespace, dst: Cubespace) -> dict:
    """Coerce a callable or mapping into a total dict ground(src) -> ground(dst)."""
    if callable(f) and not isinstance(f, dict):
        table = {x: f(x) for x in src.ground}
    else:
        table = dict(f)
    for x in src.ground:
        if x not in table:
            raise InvalidArgumentError(f"map not defined at {x!r}")
        if table[x] not in dst._ground_index:
            raise InvalidArgumentError(f"image {table[x]!r} is not a ground point")
    return table


def morphism_violation(f, N1: Cubespace, N2: Cubespace, n_upto: int = 3,
                       budget: int | None = None):
    """First member cube whose image is not a cube, or None."""
    table = normalize_map(f, N1, N2)
    for n in range(1, n_upto + 1):
        for c in N1.enumerate_cubes(n, budget):
            image = tuple(table[x] for x in c)
            if not N2.member(n, image):
                return (n, c, image)
    return None


def is_morphism(f, N1: Cubespace, N2: Cubespace, n_upto: int = 3,
                budget: int | None = None) -> bool:
    """True iff every member cube of N1 up to n_upto maps to a member cube of N2."""
    return morphism_violation(f, N1, N2, n_upto, budget) is None


# ---------------------------------------------------------------------------
# morphisms between degree structures, decided at the critical dimension


@lru_cache(maxsize=None)
def _signed_weight_vectors_cached(orders: tuple[int, ...], i: int, nstar: int,
                                  budget: int):
    return _signed_weight_vectors_impl(FinAbGroup(orders), i, nstar, budget)


def _signed_weight_vectors(A: FinAbGroup, i: int, nstar: int,
                           budget: int) -> np.ndarray:
    return _signed_weight_vectors_cached(A.cyclic_orders, i, nstar, budget)


def _signed_weight_vectors_impl(A: FinAbGroup, i: int, nstar: int,
                                budget: int) -> np.ndarray:
    """Distinct signed value-count vectors over cubes of the degree-i structure.

    For a cube c of C^{nstar}(D_i(A)) the vector w_c[a] = sum over vertices v of
    (-1)^{h(v)} [c(v) = a]; the top alternating sum of phi o c is then
    sum_a w_c[a] phi(a), so these vectors are all a morphism test needs.
    Constant shifts of a cube permute the value labels, so only cubes with zero
    constant term are enumerated and the set is closed under shifts afterwards.
    """
    size = 1 << nstar
    mods = [m for m in A.cyclic_orders]
    sel = tuple(s for s in masks_upto(nstar, i) if s != 0)
    total = math.prod(m ** len(sel) for m in mods)
    if total > budget:
        raise ResourceLimitError(
            f"{total} cubes exceed budget {budget}", needed=total, budget=budget)
    inc_t = np.array([[1 if (s & v) == s else 0 for v in range(size)]
                      for s in sel], dtype=np.int64)  # |sel| x size
    signs = np.array([(-1) ** popcount(v) for v in range(size)], dtype=np.int64)
    # element index strides matching FinAbGroup.elements (itertools.product order)
    strides = [0] * len(mods)
    acc = 1
    for comp in range(len(mods) - 1, -1, -1):
        strides[comp] = acc
        acc *= mods[comp]
    ncols = len(sel)
    # coefficient tuples are mixed-radix digits: component-major, mask-minor,
    # least significant digit last
    radices = np.array([mods[comp] for comp in range(len(mods))
                        for _ in range(ncols)], dtype=np.int64)
    divs = np.ones(len(radices), dtype=np.int64)
    for p in range(len(radices) - 2, -1, -1):
        divs[p] = divs[p + 1] * radices[p + 1]
    chunk = 1 << 18
    uniq: set[tuple[int, ...]] = set()
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // divs[None, :]) % radices[None, :]
        flat = np.zeros((len(idx), size), dtype=np.int64)
        for comp, m in enumerate(mods):
            block = digits[:, comp * ncols:(comp + 1) * ncols]
            flat += (block @ inc_t % m) * strides[comp]
        w = np.stack([((flat == a) * signs).sum(axis=1)
                      for a in range(A.order)], axis=1)
        for row in np.unique(w, axis=0):
            uniq.add(tuple(int(x) for x in row))
    # close under value relabeling by constant shifts
    shifted: set[tuple[int, ...]] = set()
    for k in A.elements:
        perm = [A.index_of(A.sub(a, k)) for a in A.elements]
        for row in uniq:
            shifted.add(tuple(row[p] for p in perm))
    return np.array(sorted(shifted), dtype=np.int64)


def _map_satisfies_weights(phi_coords: np.ndarray, weights: np.ndarray,
                           B: FinAbGroup) -> bool:
    """Check sum_a w[a] * phi(a) = 0 in B for every weight vector."""
    if weights.size == 0:
        return True
    prod_ = weights @ phi_coords  # (#weights, rank-of-coords)
    for j, m in enumerate(B.cyclic_orders):
        if np.any(prod_[:, j] % m):
            return False
    return True


@dataclass
class DerivmorphReport:
    """Exhaustive classification of maps A -> B as degree-structure morphisms."""

    i: int
    j: int
    morphisms: list[tuple]
    total_maps: int
    constant_violations: list[tuple]
    reclassification_violations: list[tuple]

    @property
    def ok(self) -> bool:
        return not self.constant_violations and not self.reclassification_violations


def degree_morphisms(A: FinAbGroup, B: FinAbGroup, i: int, j: int,
                     budget: int | None = None) -> list[tuple]:
    """All maps A -> B that are morphisms from the degree-i to the degree-j structure.

    Decided exactly at the critical dimension j+1: a map into a degree-j
    structure is a cube iff all its multilinear coefficients above degree j
    vanish, and on {0,1}^(j+1) the only such coefficient is the top alternating
    sum, so the whole morphism property collapses to weight-vector conditions.
    """
    cap = candidate_budget(budget)
    n_maps = B.order ** A.order
    if n_maps > cap:
        raise ResourceLimitError(f"{n_maps} maps exceed budget {cap}",
                                 needed=n_maps, budget=cap)
    weights = _signed_weight_vectors(A, i, j + 1, cap)
    out = []
    for images in itertools.product(B.elements, repeat=A.order):
        phi = np.array(images, dtype=np.int64).reshape(A.order, -1)
        if _map_satisfies_weights(phi, weights, B):
            out.append(images)
    return out


def check_derivmorph(A: FinAbGroup, B: FinAbGroup, i: int, j: int,
                     k_upto: int | None = None,
                     budget: int | None = None) -> DerivmorphReport:
    """Classify Hom(D_i(A), D_j(B)) exhaustively.

    For i > j every morphism must be constant; for 1 <= i <= j every morphism
    must also be a morphism from the degree-1 structure to degree j-i+1.
    Optionally cross-checks each verdict by direct cube enumeration up to
    k_upto dimensions.
    """
    cap = candidate_budget(budget)
    homs = degree_morphisms(A, B, i, j, cap)
    constant_violations = []
    reclass_violations = []
    if i > j:
        for images in homs:
            if len(set(images)) > 1:
                constant_violations.append(images)
    elif i >= 1:
        jprime = j - i + 1
        weights1 = _signed_weight_vectors(A, 1, jprime + 1, cap)
        for images in homs:
            phi = np.array(images, dtype=np.int64).reshape(A.order, -1)
            if not _map_satisfies_weights(phi, weights1, B):
                reclass_violations.append(images)
    if k_upto is not None:
        src = dk_structure(A, i)
        dst = dk_structure(B, j)
        for images in homs:
            table = {a: b for a, b in zip(A.elements, images)}
            if not is_morphism(table, src, dst, n_upto=k_upto, budget=cap):
                raise AssertionError("critical-dimension verdict disagrees with "
                                     "direct enumeration")
    return DerivmorphReport(i=i, j=j, morphisms=homs,
                            total_maps=B.order ** A.order,
                            constant_violations=constant_violations,
                            reclassification_violations=reclass_violations)
