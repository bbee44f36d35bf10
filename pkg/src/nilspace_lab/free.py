"""Free degree structures, binomial-basis polynomial maps, and the tower recipes.

The modulo-n free space of rank (a_1, ..., a_k) is the product of degree-i
structures on Z_n^{a_i}.  Infinite free structures appear only symbolically:
claims about them are checked on bounded integer windows, which the
periodicity bounds make sufficient.  `factor_to_finite` builds a finite free
cover of a k-step space level by level (subdirect product, split section,
surjection onto the structure group), and `lift_morphism` pushes a morphism
from a group through that cover, extending the group as little as it can.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

from .bundles import (StructureGroupResult, factor_nilspace, is_factor_map,
                      sim_classes, structure_group)
from .cubespace import (Cubespace, DegreeProductSpace, dk_structure,
                        is_morphism, linear_structure, masks_upto,
                        point_space, subdirect_product)
from .errors import (InvalidArgumentError, ResourceLimitError,
                     StructuralFailureError, candidate_budget)
from .extensions import Extension, find_section, verify_extension
from .groups import FinAbGroup, GroupExtension, height_extension, make_group


@dataclass(frozen=True)
class FreeRank:
    """Rank profile (a_1, ..., a_k); modulus None means the symbolic free space."""

    ranks: tuple[int, ...]
    modulus: int | None = None

    def __post_init__(self):
        if any(a < 0 for a in self.ranks):
            raise InvalidArgumentError("ranks must be nonnegative")
        if self.modulus is not None and self.modulus < 1:
            raise InvalidArgumentError("modulus must be >= 1")

    @property
    def ground_size(self) -> int | None:
        if self.modulus is None:
            return None
        return self.modulus ** sum(self.ranks)


def mod_free_nilspace(n: int, ranks, n_max: int = 6,
                      budget: int | None = None) -> DegreeProductSpace:
    """The product of degree-i structures on Z_n^{a_i} for the rank profile."""
    ranks = tuple(int(a) for a in ranks)
    size = n ** sum(ranks)
    cap = candidate_budget(budget)
    if size > cap:
        raise ResourceLimitError(f"ground size {size} exceeds budget {cap}",
                                 needed=size, budget=cap)
    comps = [(n, i) for i, a in enumerate(ranks, start=1) for _ in range(a)]
    return DegreeProductSpace(comps, n_max=n_max)


def binom_int(x: int, j: int) -> int:
    """Binomial coefficient C(x, j) for any integer x and j >= 0."""
    if j < 0:
        raise InvalidArgumentError("lower index must be nonnegative")
    if j == 0:
        return 1
    if x < 0:
        return (-1) ** j * binom_int(j - x - 1, j)
    if x < j:
        return 0
    return math.comb(x, j)


@dataclass(frozen=True)
class PolyMap:
    """x -> sum_r coeff_r * prod_i C(x_i, r_i) into a finite abelian group."""

    arity: int
    target: FinAbGroup
    coeffs: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @classmethod
    def from_dict(cls, arity: int, target: FinAbGroup, coeffs: dict) -> "PolyMap":
        items = []
        for r, c in sorted(coeffs.items()):
            r = tuple(int(x) for x in r)
            if len(r) != arity or any(x < 0 for x in r):
                raise InvalidArgumentError("bad multi-index")
            c = target.reduce(tuple(c))
            if any(c):
                items.append((r, c))
        return cls(arity, target, tuple(items))

    @property
    def degree(self) -> int:
        return max((sum(r) for r, _ in self.coeffs), default=0)

    def evaluate(self, xs) -> tuple[int, ...]:
        xs = [int(x) for x in xs]
        if len(xs) != self.arity:
            raise InvalidArgumentError("arity mismatch")
        acc = self.target.zero
        for r, c in self.coeffs:
            w = 1
            for x, rj in zip(xs, r):
                w *= binom_int(x, rj)
                if w == 0:
                    break
            if w:
                acc = self.target.add(acc, self.target.scale(w, c))
        return acc


def minimal_period(p: PolyMap, bound: int) -> int:
    """Least period of an arity-1 map, given a verified period bound.

    Verifies p(x + bound) = p(x) on a full window first; the set of periods is
    then a subgroup of Z, so the minimum divides the bound.
    """
    if p.arity != 1:
        raise InvalidArgumentError("periods are for arity-1 maps")
    values = [p.evaluate([x]) for x in range(2 * bound)]
    for x in range(bound):
        if values[x + bound] != values[x]:
            raise StructuralFailureError(
                f"map is not {bound}-periodic", witness=x)
    for d in sorted(d for d in range(1, bound + 1) if bound % d == 0):
        if all(values[x + d] == values[x] for x in range(bound)):
            return d
    return bound


def period_of_polymap(p: PolyMap, i: int, k: int) -> int:
    """Minimal period of a degree <= k-i+1 map into a group of order n.

    The period is asserted to divide n^(k-i+1); a violation is a structural
    failure (it falsifies the periodicity bound, not the input format).
    """
    if k < i:
        raise InvalidArgumentError("need i <= k")
    n = p.target.order
    bound = n ** (k - i + 1)
    return minimal_period(p, bound)


def poly_is_morphism(p: PolyMap, i: int, k: int,
                     budget: int | None = None) -> bool:
    """Does p define a morphism from the degree-i integers to the degree-k target?

    The map is periodic, so the window check collapses onto the cyclic quotient
    by its period: integer cubes reduce onto the quotient's cubes and back, and
    the morphism property is decided there up to the critical dimension k+1.
    """
    if p.arity != 1:
        raise InvalidArgumentError("morphism check is for arity-1 maps")
    n = p.target.order
    d = max(p.degree, 1)
    period = minimal_period(p, n ** d)
    src = DegreeProductSpace([(period, i)], n_max=k + 1)
    dst = DegreeProductSpace([(m, k) for m in p.target.cyclic_orders],
                             n_max=max(k + 1, 3))
    table = {(r,): p.evaluate([r]) for r in range(period)}
    return is_morphism(table, src, dst, n_upto=k + 1, budget=budget)


@dataclass
class ModReduction:
    """Coordinatewise reduction of the symbolic free space onto a finite one."""

    ranks: tuple[int, ...]
    modulus: int
    verified_dims: dict = field(default_factory=dict)

    def __call__(self, vector) -> tuple[int, ...]:
        vector = tuple(int(x) for x in vector)
        if len(vector) != sum(self.ranks):
            raise InvalidArgumentError("coordinate count mismatch")
        return tuple(x % self.modulus for x in vector)

    def levels(self) -> list[int]:
        return [i for i, a in enumerate(self.ranks, start=1) for _ in range(a)]

    def verify_window(self, n_upto: int = 2, coeff_window: int = 2,
                      budget: int | None = None) -> bool:
        """Check on integer-coefficient window cubes that images are cubes."""
        cap = candidate_budget(budget)
        target = mod_free_nilspace(self.modulus, self.ranks,
                                   n_max=max(n_upto, 2))
        levels = self.levels()
        for n in range(1, n_upto + 1):
            per_comp = []
            for lvl in levels:
                sel = masks_upto(n, lvl)
                tables = []
                coeff_range = range(-coeff_window, coeff_window + 1)
                count = len(coeff_range) ** len(sel)
                if count > cap:
                    raise ResourceLimitError(
                        f"{count} window cubes exceed budget {cap}",
                        needed=count, budget=cap, dimension=n)
                for coeffs in itertools.product(coeff_range, repeat=len(sel)):
                    vals = [0] * (1 << n)
                    for a, s in zip(coeffs, sel):
                        if a:
                            for v in range(1 << n):
                                if s & v == s:
                                    vals[v] += a
                    tables.append(tuple(vals))
                per_comp.append(tables)
            for combo in itertools.product(*per_comp):
                cube = tuple(self(pt) for pt in zip(*combo))
                if not target.member(n, cube):
                    self.verified_dims[n] = False
                    return False
            self.verified_dims[n] = True
        return True


def reduce_mod(ranks, n_alpha: int) -> ModReduction:
    """The morphism taking every coordinate of the free space mod n_alpha."""
    if n_alpha < 1:
        raise InvalidArgumentError("modulus must be >= 1")
    return ModReduction(tuple(int(a) for a in ranks), int(n_alpha))


# ---------------------------------------------------------------------------
# finite factors of free spaces


@dataclass
class TowerLevel:
    """Per-level data of the constructed free cover."""

    level: int
    space: Cubespace                 # the i-th factor X_i of N
    down: dict                       # X_i -> X_{i-1}
    sg: StructureGroupResult         # structure group acting on X_i
    section: dict                    # F_(i-1)-part ground -> subdirect pairs
    rank: int


@dataclass
class FreeFactorResult:
    """A modulo-e^alpha free cover F of N with a certified factor map h."""

    space: DegreeProductSpace
    h: dict
    ranks: tuple[int, ...]
    alpha: int
    exponent: int
    kstep: int
    levels: list[TowerLevel]
    base: Cubespace
    transcript: dict = field(default_factory=dict)


def _tower_projection(upper: Cubespace, lower: Cubespace) -> dict:
    """Map each point/class of the upper factor into its lower-factor class."""
    from .bundles import FactorSpace
    down = {}
    for x in upper.ground:
        members = set(x) if isinstance(upper, FactorSpace) else {x}
        for cls in lower.ground:
            target = set(cls) if isinstance(cls, tuple) and not isinstance(
                lower, DegreeProductSpace) else {cls}
            if members <= target:
                down[x] = cls
                break
        else:
            raise StructuralFailureError("tower projection undefined", witness=x)
    return down


def _fiber_difference(sg: StructureGroupResult, x, y):
    """Unique group coordinates a with act(a, y) = x."""
    for a in sg.group.elements:
        if sg.act(a, y) == x:
            return a
    raise StructuralFailureError("points are not in one fiber orbit",
                                 witness=(x, y))


def factor_to_finite(N: Cubespace, k: int | None = None, alpha_cap: int = 3,
                     budget: int | None = None) -> FreeFactorResult:
    """Build a modulo-e^alpha free cover and factor map onto N, level by level.

    At level i the partial cover F is glued to the i-th factor X_i along the
    partial factor map, the glued space is certified as a degree-i extension of
    F by the i-th structure group, a split section is searched for, and a
    canonical surjection from free cyclic coordinates onto the structure group
    extends both the cover and the map.  alpha is minimized by iterative
    deepening; exhaustion at every alpha is reported as a structural failure.
    """
    cap = candidate_budget(budget)
    if k is None:
        if N.step_hint is None:
            raise InvalidArgumentError("step unknown; pass k")
        k = N.step_hint
    if k == 0 or len(N.ground) == 1:
        F = point_space()
        return FreeFactorResult(space=F, h={(): N.ground[0]}, ranks=(),
                                alpha=1, exponent=1, kstep=0, levels=[],
                                base=N)
    factors: list[Cubespace] = []
    for i in range(1, k + 1):
        factors.append(N if i == k else factor_nilspace(N, i, budget=budget)[0])
    sgs = [structure_group(N, i, k=k, budget=budget) for i in range(1, k + 1)]
    e = math.lcm(*(sg.group.exponent for sg in sgs))
    ranks = tuple(sg.group.rank for sg in sgs)
    downs: list[dict] = []
    for i in range(1, k + 1):
        if i == 1:
            downs.append({x: () for x in factors[0].ground})
        else:
            downs.append(_tower_projection(factors[i - 1], factors[i - 2]))

    failures = []
    for alpha in range(1, alpha_cap + 1):
        m = e ** alpha
        try:
            result = _build_tower(N, k, m, factors, sgs, downs, ranks, cap)
        except _SectionExhausted as exc:
            failures.append((alpha, str(exc)))
            continue
        result.alpha = alpha
        result.exponent = e
        result.transcript["failures"] = failures
        if not is_factor_map(result.h, result.space, N, k=k, budget=budget):
            raise StructuralFailureError(
                "constructed map failed independent factor-map certification",
                witness=result.h)
        return result
    raise StructuralFailureError(
        f"no split tower up to alpha={alpha_cap}", witness=failures)


class _SectionExhausted(Exception):
    pass


def _build_tower(N, k, m, factors, sgs, downs, ranks, cap) -> FreeFactorResult:
    F_cur: DegreeProductSpace = point_space()
    h_cur: dict = {(): ()}
    levels: list[TowerLevel] = []
    comps: list[tuple[int, int]] = []
    for i in range(1, k + 1):
        X = factors[i - 1]
        sg = sgs[i - 1]
        down = downs[i - 1]
        prev: Cubespace = factors[i - 2] if i >= 2 else point_space()
        h_prev = {x: h_cur[x] for x in F_cur.ground}
        Q = subdirect_product(F_cur, X, h_prev, down, factor=prev)
        proj = {pt: pt[0] for pt in Q.ground}

        def action(a, pt, _sg=sg):
            return (pt[0], _sg.act(a, pt[1]))

        if sg.group.order == 1:
            section = {x: (x, _unique_fiber_point(Q, x)) for x in F_cur.ground}
        else:
            ext = verify_extension(Q, F_cur, sg.group, proj, i, action,
                                   n_upto=min(3, Q.n_max, F_cur.n_max),
                                   budget=cap)
            found = find_section(ext, budget=cap)
            if not found.found:
                raise _SectionExhausted(
                    f"level {i}: {found.candidates_checked} candidates exhausted")
            section = found.section
        inv = sg.group.invariant_factors
        r = len(inv)
        if any(m % d for d in inv):
            raise _SectionExhausted(
                f"level {i}: modulus {m} does not cover exponent {sg.group.exponent}")
        new_comps = comps + [(m, i)] * r
        F_new = DegreeProductSpace(new_comps, n_max=F_cur.n_max)
        h_new = {}
        low_len = len(comps)
        for pt in F_new.ground:
            low, z = pt[:low_len], pt[low_len:]
            b = section[low][1]
            a = tuple(zj % dj for zj, dj in zip(z, inv))
            h_new[pt] = sg.act(a, b)
        levels.append(TowerLevel(level=i, space=X, down=down, sg=sg,
                                 section=section, rank=r))
        F_cur, h_cur, comps = F_new, h_new, new_comps
    return FreeFactorResult(space=F_cur, h=h_cur, ranks=ranks, alpha=0,
                            exponent=0, kstep=k, levels=levels, base=N)


def _unique_fiber_point(Q, x):
    pts = [pt for pt in Q.ground if pt[0] == x]
    if len(pts) != 1:
        raise StructuralFailureError("trivial group with non-singleton fiber",
                                     witness=x)
    return pts[0][1]


# ---------------------------------------------------------------------------
# lifting morphisms from groups


@dataclass
class MorphismLift:
    """A morphism lifted through a group extension into a reduced free cover."""

    extension: GroupExtension
    height: int
    psi: dict                     # total-group coordinates -> F' ground
    beta: dict                    # F' ground -> N ground (factor map)
    fprime: DegreeProductSpace
    cover: FreeFactorResult
    transcript: dict = field(default_factory=dict)


def _solve_component_lift(t: dict, B: FinAbGroup, m: int, inv, degree: int,
                          budget: int, n_upto: int) -> dict | None:
    """Find psi2: B -> Z_m^r with componentwise reduction t and the degree bound.

    Candidates enumerate, per group element, the reduction fiber over its
    target coordinates; the first assignment that is a morphism from the
    linear structure into the degree-`degree` structure wins.
    """
    r = len(inv)
    if r == 0:
        return {b: () for b in B.elements}
    fibers = []
    for b in B.elements:
        want = t[b]
        fib = [y for y in itertools.product(range(m), repeat=r)
               if all(yj % dj == wj for yj, dj, wj in zip(y, inv, want))]
        if not fib:
            return None
        fibers.append(fib)
    total = math.prod(len(f) for f in fibers)
    if total > budget:
        raise ResourceLimitError(f"{total} lift candidates exceed budget",
                                 needed=total, budget=budget)
    src = linear_structure(B)
    dst = DegreeProductSpace([(m, degree)] * r, n_max=max(n_upto, degree + 1))
    for choice in itertools.product(*fibers):
        table = dict(zip(B.elements, choice))
        if is_morphism(table, src, dst, n_upto=n_upto, budget=budget):
            return table
    return None


def lift_morphism(phi, A: FinAbGroup, N: Cubespace, ext_cap: int = 3,
                  alpha_cap: int = 3, k: int | None = None,
                  budget: int | None = None) -> MorphismLift:
    """Lift a morphism A -> N to psi: B -> F' over a height extension B of A.

    F' is the free cover with its top level replaced by the top structure group
    directly; beta: F' -> N is the factor map read off the cover's sections,
    and the commuting identity beta(psi(b)) = phi(tau(b)) holds pointwise on B.
    """
    cap = candidate_budget(budget)
    cover = factor_to_finite(N, k=k, alpha_cap=alpha_cap, budget=budget)
    k = cover.kstep
    srcA = linear_structure(A)
    if callable(phi) and not isinstance(phi, dict):
        phi = {x: phi(x) for x in srcA.ground}
    else:
        phi = dict(phi)
    if not is_morphism(phi, srcA, N, n_upto=min(k + 1, N.n_max), budget=budget):
        raise InvalidArgumentError("phi is not a morphism from the linear structure")

    m = cover.exponent ** cover.alpha
    # F': replace the top free coordinates by the top structure group itself
    if k == 0:
        fprime = point_space()
    else:
        low_comps = []
        for lvl in cover.levels[:-1]:
            low_comps += [(m, lvl.level)] * lvl.rank
        top = cover.levels[-1]
        top_inv = top.sg.group.invariant_factors
        fprime = DegreeProductSpace(low_comps + [(d, k) for d in top_inv],
                                    n_max=cover.space.n_max)

    beta = _reduced_factor_map(cover, fprime)
    if not is_factor_map(beta, fprime, N, k=max(k, 1), budget=budget):
        raise StructuralFailureError("reduced cover map is not a factor map",
                                     witness=beta)

    last_error = None
    for i in range(1, ext_cap + 1):
        ext = height_extension(A, i)
        B = ext.total
        target = {b: phi[ext.proj(b)] for b in B.elements}
        psi_full = _lift_through_levels(target, B, cover, m, cap)
        if psi_full is None:
            last_error = f"no component lift at height {i}"
            continue
        psi = {}
        if k == 0:
            psi = {b: () for b in B.elements}
        else:
            top = cover.levels[-1]
            low_len = sum(lvl.rank for lvl in cover.levels[:-1])
            top_inv = top.sg.group.invariant_factors
            for b, coords in psi_full.items():
                low, z = coords[:low_len], coords[low_len:]
                psi[b] = low + tuple(zj % dj for zj, dj in zip(z, top_inv))
        ok = all(beta[psi[b]] == target[b] for b in B.elements)
        if not ok:
            last_error = f"commuting identity failed at height {i}"
            continue
        if not is_morphism(psi, linear_structure(B), fprime,
                           n_upto=min(k + 1, fprime.n_max), budget=budget):
            last_error = f"lift not a morphism at height {i}"
            continue
        return MorphismLift(extension=ext, height=i, psi=psi, beta=beta,
                            fprime=fprime, cover=cover,
                            transcript={"heights_tried": i})
    raise StructuralFailureError(
        f"no lift within height cap {ext_cap}: {last_error}",
        witness=last_error)


def _reduced_factor_map(cover: FreeFactorResult, fprime: DegreeProductSpace) -> dict:
    """beta on the reduced cover: low coordinates through the sections, top
    coordinates acting directly through the top structure group."""
    if cover.kstep == 0:
        return {(): cover.base.ground[0]}
    top = cover.levels[-1]
    low_len = sum(lvl.rank for lvl in cover.levels[:-1])
    beta = {}
    for pt in fprime.ground:
        low, a = pt[:low_len], pt[low_len:]
        b = top.section[low][1]
        beta[pt] = top.sg.act(a, b)
    return beta


def _lift_through_levels(target: dict, B: FinAbGroup, cover: FreeFactorResult,
                         m: int, budget: int) -> dict | None:
    """Solve the level components bottom-up; returns full free coordinates."""
    k = cover.kstep
    if k == 0:
        return {b: () for b in B.elements}
    # targets per level: project down the tower
    targets: list[dict] = [None] * (k + 1)
    targets[k] = target
    for i in range(k, 1, -1):
        down = cover.levels[i - 1].down
        targets[i - 1] = {b: down[targets[i][b]] for b in B.elements}
    psi_low: dict = {b: () for b in B.elements}
    for i in range(1, k + 1):
        lvl = cover.levels[i - 1]
        t = {}
        for b in B.elements:
            anchor = lvl.section[psi_low[b]][1]
            t[b] = _fiber_difference(lvl.sg, targets[i][b], anchor)
        psi2 = _solve_component_lift(t, B, m, lvl.sg.group.invariant_factors,
                                     degree=i, budget=budget,
                                     n_upto=min(i + 1, 3))
        if psi2 is None:
            return None
        psi_low = {b: psi_low[b] + psi2[b] for b in B.elements}
    return psi_low
