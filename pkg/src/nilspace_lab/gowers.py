"""Uniformity norms, phase polynomials, projections, and correlation searches.

Unimodular functions carry their phases as exact rationals mod 1; every phase
certificate (difference trivialization, q-th power identities, factorization)
is decided in exact arithmetic.  Floating point appears only in norms and
correlations, with a 1e-9 working tolerance, and every reported correlation is
recomputed by an independent plain summation before it is emitted.
"""
from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cubespace import Cubespace, is_morphism, linear_structure
from .errors import (InvalidArgumentError, ResourceLimitError,
                     StructuralFailureError, candidate_budget)
from .free import PolyMap, binom_int
from .groups import (Character, FinAbGroup, GroupExtension, characters,
                     make_group, phase_to_complex)

NORM_TOL = 1e-9
EXACT_TOL = 1e-12


@lru_cache(maxsize=None)
def _add_table(orders: tuple[int, ...]) -> np.ndarray:
    G = FinAbGroup(orders)
    size = G.order
    table = np.zeros((size, size), dtype=np.int64)
    for i, x in enumerate(G.elements):
        for j, y in enumerate(G.elements):
            table[i, j] = G.index_of(G.add(x, y))
    return table


@dataclass
class GroupFunction:
    """Complex-valued function on a group, indexed by the element enumeration."""

    group: FinAbGroup
    values: np.ndarray
    exact_phases: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.group.order,):
            raise InvalidArgumentError("one value per group element")
        if np.any(np.abs(vals) > 1 + EXACT_TOL):
            raise InvalidArgumentError("values must satisfy |f| <= 1")
        self.values = vals
        if self.exact_phases is not None:
            phases = tuple(Fraction(p) % 1 for p in self.exact_phases)
            if len(phases) != self.group.order:
                raise InvalidArgumentError("one phase per group element")
            for p, v in zip(phases, vals):
                if abs(phase_to_complex(p) - v) > 1e-10:
                    raise InvalidArgumentError("phases disagree with values")
            self.exact_phases = phases

    @classmethod
    def from_phases(cls, group: FinAbGroup, phases) -> "GroupFunction":
        phases = tuple(Fraction(p) % 1 for p in phases)
        vals = np.array([phase_to_complex(p) for p in phases])
        return cls(group, vals, phases)

    @classmethod
    def constant(cls, group: FinAbGroup, phase=Fraction(0)) -> "GroupFunction":
        return cls.from_phases(group, [Fraction(phase)] * group.order)

    @classmethod
    def from_character(cls, chi: Character) -> "GroupFunction":
        return cls.from_phases(chi.group,
                               [chi.phase(x) for x in chi.group.elements])

    @classmethod
    def random_unimodular(cls, group: FinAbGroup, seed: int,
                          denominator: int = 360) -> "GroupFunction":
        rng = random.Random(seed)
        phases = [Fraction(rng.randrange(denominator), denominator)
                  for _ in range(group.order)]
        return cls.from_phases(group, phases)

    def is_unimodular(self) -> bool:
        return bool(np.all(np.abs(np.abs(self.values) - 1.0) <= 1e-10))

    def conj(self) -> "GroupFunction":
        phases = tuple((-p) % 1 for p in self.exact_phases) \
            if self.exact_phases is not None else None
        return GroupFunction(self.group, np.conj(self.values), phases)

    def __mul__(self, other: "GroupFunction") -> "GroupFunction":
        if self.group != other.group:
            raise InvalidArgumentError("functions on different groups")
        phases = None
        if self.exact_phases is not None and other.exact_phases is not None:
            phases = tuple((p + q) % 1 for p, q in
                           zip(self.exact_phases, other.exact_phases))
        return GroupFunction(self.group, self.values * other.values, phases)


def delta(f: GroupFunction, t) -> GroupFunction:
    """The multiplicative difference x -> f(x) * conj(f(x + t))."""
    G = f.group
    t = G.reduce(tuple(t))
    table = _add_table(G.cyclic_orders)
    tidx = G.index_of(t)
    shifted = f.values[table[:, tidx]]
    phases = None
    if f.exact_phases is not None:
        phases = tuple((f.exact_phases[i] - f.exact_phases[table[i, tidx]]) % 1
                       for i in range(G.order))
    return GroupFunction(G, f.values * np.conj(shifted), phases)


def gowers_norm(f: GroupFunction, d: int, budget: int | None = None) -> float:
    """The order-d uniformity norm: the 2^d-th root of the averaged d-fold
    multiplicative difference over all base points and directions."""
    if d < 1:
        raise InvalidArgumentError("norm order must be >= 1")
    G = f.group
    cap = candidate_budget(budget)
    work = (G.order ** (d + 1)) * (1 << d)
    if work > cap:
        raise ResourceLimitError(f"{work} evaluations exceed budget {cap}",
                                 needed=work, budget=cap)
    table = _add_table(G.cyclic_orders)

    def power_average(vals: np.ndarray, depth: int) -> float:
        if depth == 1:
            m = vals.mean()
            return (m * m.conjugate()).real
        total = 0.0
        for t in range(G.order):
            total += power_average(vals * np.conj(vals[table[:, t]]), depth - 1)
        return total / G.order

    avg = power_average(f.values, d)
    if avg < -EXACT_TOL:
        raise StructuralFailureError(f"norm average {avg} is negative")
    return max(avg, 0.0) ** (1.0 / (1 << d))


def gowers_u2_fourier(f: GroupFunction) -> float:
    """Independent oracle: the fourth root of the sum of |f-hat|^4 over characters."""
    G = f.group
    total = 0.0
    for chi in characters(G):
        chivals = np.array([chi.value(x) for x in G.elements])
        coef = (f.values * np.conj(chivals)).mean()
        total += abs(coef) ** 4
    return total ** 0.25


def correlation(f: GroupFunction, g: GroupFunction) -> complex:
    """Normalized scalar product: the average of f * conj(g)."""
    if f.group != g.group:
        raise InvalidArgumentError("functions on different groups")
    return complex((f.values * np.conj(g.values)).mean())


def _correlation_plain(f: GroupFunction, g: GroupFunction) -> complex:
    """Independent recomputation with Python sums, used before reporting."""
    terms = [complex(a) * complex(b).conjugate()
             for a, b in zip(f.values, g.values)]
    re = math.fsum(t.real for t in terms) / len(terms)
    im = math.fsum(t.imag for t in terms) / len(terms)
    return complex(re, im)


def lift_function(f: GroupFunction, ext: GroupExtension) -> GroupFunction:
    """Pull a base function back through the extension's projection."""
    if f.group != ext.base:
        raise InvalidArgumentError("function must live on the extension base")
    B = ext.total
    idx = [f.group.index_of(ext.proj(b)) for b in B.elements]
    phases = tuple(f.exact_phases[i] for i in idx) \
        if f.exact_phases is not None else None
    return GroupFunction(B, f.values[idx], phases)


def project_phase(phi: GroupFunction, ext: GroupExtension) -> GroupFunction:
    """Fiber average of a function on the extension total; magnitude <= 1."""
    if phi.group != ext.total:
        raise InvalidArgumentError("function must live on the extension total")
    A = ext.base
    sums = {a: 0j for a in A.elements}
    counts = {a: 0 for a in A.elements}
    for b, v in zip(ext.total.elements, phi.values):
        a = ext.proj(b)
        sums[a] += complex(v)
        counts[a] += 1
    vals = np.array([sums[a] / counts[a] for a in A.elements])
    assert np.all(np.abs(vals) <= 1 + 1e-10)
    return GroupFunction(A, vals)


# ---------------------------------------------------------------------------
# phase polynomials


@dataclass
class PhaseCheck:
    """Transcript of an exact difference-trivialization check."""

    ok: bool
    degree: int
    tuples_checked: int
    failing_tuple: tuple | None
    failing_point: tuple | None


def phase_check(phi: GroupFunction, k: int,
                budget: int | None = None) -> PhaseCheck:
    """Exact check that k+1 multiplicative differences trivialize phi.

    Requires exact phases; walks the difference tree once per direction tuple
    and records the first failure.
    """
    if phi.exact_phases is None:
        raise InvalidArgumentError("exact phases are required for certification")
    if k < 0:
        raise InvalidArgumentError("degree must be >= 0")
    G = phi.group
    cap = candidate_budget(budget)
    work = G.order ** (k + 1)
    if work > cap:
        raise ResourceLimitError(f"{work} tuples exceed budget {cap}",
                                 needed=work, budget=cap)
    table = _add_table(G.cyclic_orders)
    checked = 0

    def diff(phases, tidx):
        return tuple((phases[i] - phases[table[i, tidx]]) % 1
                     for i in range(G.order))

    def walk(phases, prefix):
        nonlocal checked
        if len(prefix) == k + 1:
            checked += 1
            for i, p in enumerate(phases):
                if p != 0:
                    return prefix, G.elements[i]
            return None
        for tidx in range(G.order):
            bad = walk(diff(phases, tidx), prefix + (G.elements[tidx],))
            if bad is not None:
                return bad
        return None

    bad = walk(tuple(phi.exact_phases), ())
    if bad is None:
        return PhaseCheck(ok=True, degree=k, tuples_checked=checked,
                          failing_tuple=None, failing_point=None)
    return PhaseCheck(ok=False, degree=k, tuples_checked=checked,
                      failing_tuple=bad[0], failing_point=bad[1])


def is_phase_polynomial(phi: GroupFunction, k: int,
                        budget: int | None = None) -> bool:
    return phase_check(phi, k, budget).ok


@dataclass
class PhasePolynomial:
    """Unimodular function with a verified degree certificate."""

    base: GroupFunction
    degree_cert: int
    transcript: PhaseCheck
    binomial_phases: dict[tuple[int, ...], Fraction] | None = None

    @property
    def group(self) -> FinAbGroup:
        return self.base.group

    @property
    def phases(self) -> tuple[Fraction, ...]:
        return self.base.exact_phases


def certify_phase_polynomial(phi: GroupFunction, k: int,
                             budget: int | None = None,
                             binomial_phases=None) -> PhasePolynomial:
    check = phase_check(phi, k, budget)
    if not check.ok:
        raise StructuralFailureError(
            f"not a degree-{k} phase polynomial",
            witness=(check.failing_tuple, check.failing_point))
    return PhasePolynomial(base=phi, degree_cert=k, transcript=check,
                           binomial_phases=binomial_phases)


def binomial_phase_function(group: FinAbGroup,
                            coeff_phases: dict) -> GroupFunction:
    """Unimodular function with phase sum_r theta_r * prod_j C(x_j, r_j).

    Coordinates evaluate on the canonical residue representatives.
    """
    rank = len(group.cyclic_orders)
    coeffs = {}
    for r, th in coeff_phases.items():
        r = tuple(int(x) for x in r)
        if len(r) != rank:
            raise InvalidArgumentError("multi-index arity mismatch")
        th = Fraction(th) % 1
        if th:
            coeffs[r] = th
    phases = []
    for x in group.elements:
        total = Fraction(0)
        for r, th in coeffs.items():
            w = 1
            for xj, rj in zip(x, r):
                w *= binom_int(xj, rj)
                if w == 0:
                    break
            if w:
                total += w * th
        phases.append(total % 1)
    return GroupFunction.from_phases(group, phases)


def phase_poly_from_coeffs(group: FinAbGroup, p: PolyMap, chi: Character,
                           budget: int | None = None) -> PhasePolynomial:
    """Compose a binomial-basis polynomial map with a character and certify.

    The domain group must be cyclic of rank matching the map's arity; the
    degree certificate is the map's degree, and a certification failure is a
    structural failure (the map or character was not as described).
    """
    if p.arity != len(group.cyclic_orders):
        raise InvalidArgumentError("map arity must match the group rank")
    if chi.group != p.target:
        raise InvalidArgumentError("character must live on the map's target")
    coeff_phases: dict[tuple[int, ...], Fraction] = {}
    for r, c in p.coeffs:
        coeff_phases[r] = chi.phase(c)
    phi = binomial_phase_function(group, coeff_phases)
    k = max(p.degree, 0)
    try:
        return certify_phase_polynomial(phi, k, budget,
                                        binomial_phases=coeff_phases)
    except StructuralFailureError as exc:
        raise StructuralFailureError(
            "composition failed its degree certificate; the polynomial map or "
            "character is invalid on this domain", witness=exc.witness)


def nilspace_polynomial(phi_map, A: FinAbGroup, N: Cubespace, g,
                        n_upto: int | None = None,
                        budget: int | None = None) -> GroupFunction:
    """Compose a certified morphism A -> N with a bounded weight on N."""
    src = linear_structure(A)
    n_upto = min(3, N.n_max) if n_upto is None else n_upto
    table = {x: phi_map(x) if callable(phi_map) and not isinstance(phi_map, dict)
             else phi_map[x] for x in src.ground}
    if not is_morphism(table, src, N, n_upto=n_upto, budget=budget):
        raise InvalidArgumentError("map is not a certified morphism")
    gvals = {pt: complex(g[pt] if not callable(g) else g(pt)) for pt in N.ground}
    if any(abs(v) > 1 + EXACT_TOL for v in gvals.values()):
        raise InvalidArgumentError("weight must satisfy |g| <= 1")
    vals = np.array([gvals[table[x]] for x in A.elements])
    return GroupFunction(A, vals)


# ---------------------------------------------------------------------------
# decomposition and searches


@dataclass
class PhaseDecomposition:
    """phi = phi1 * phi2 with phi1 of lower degree and phi2 of q-th roots."""

    found: bool
    phi1: PhasePolynomial | None
    phi2: GroupFunction | None
    mode: str
    candidates_checked: int = 0

    def verify(self, phi: GroupFunction, q: int) -> bool:
        if not self.found:
            return False
        product_phases = tuple(
            (a + b) % 1 for a, b in zip(self.phi1.phases,
                                        self.phi2.exact_phases))
        if product_phases != phi.exact_phases:
            return False
        return all((q * p) % 1 == 0 for p in self.phi2.exact_phases)


def decompose_phase(phi: PhasePolynomial, q: int,
                    budget: int | None = None) -> PhaseDecomposition:
    """Split a degree-k phase polynomial into a degree k-1 part and a q-th root part.

    Fast paths: phi already takes q-th roots of unity (trivial split), or phi
    is in binomial coefficient form and its top-degree coefficients have order
    dividing q (peel the top terms).  Otherwise an exhaustive search over q-th
    root functions runs within the budget.
    """
    if q < 1:
        raise InvalidArgumentError("root order must be >= 1")
    cap = candidate_budget(budget)
    G = phi.group
    k = phi.degree_cert
    phases = phi.phases
    if all((q * p) % 1 == 0 for p in phases):
        one = GroupFunction.constant(G)
        phi1 = certify_phase_polynomial(one, max(k - 1, 0), budget)
        return PhaseDecomposition(found=True, phi1=phi1, phi2=phi.base,
                                  mode="already-q-th-roots")
    if phi.binomial_phases is not None:
        top = {r: th for r, th in phi.binomial_phases.items() if sum(r) == k}
        rest = {r: th for r, th in phi.binomial_phases.items() if sum(r) < k}
        if top and all((q * th) % 1 == 0 for th in top.values()):
            phi2 = binomial_phase_function(G, top)
            phi1_fun = binomial_phase_function(G, rest)
            phi1 = certify_phase_polynomial(phi1_fun, max(k - 1, 0), budget,
                                            binomial_phases=rest)
            result = PhaseDecomposition(found=True, phi1=phi1, phi2=phi2,
                                        mode="top-coefficients")
            if not result.verify(phi.base, q):
                raise StructuralFailureError("coefficient split failed to verify")
            return result
    total = q ** G.order
    if total > cap:
        raise ResourceLimitError(f"{total} candidates exceed budget {cap}",
                                 needed=total, budget=cap)
    checked = 0
    for combo in itertools.product(range(q), repeat=G.order):
        checked += 1
        phi2 = GroupFunction.from_phases(G, [Fraction(t, q) for t in combo])
        phi1_fun = GroupFunction.from_phases(
            G, [(a - b) % 1 for a, b in zip(phases, phi2.exact_phases)])
        if is_phase_polynomial(phi1_fun, max(k - 1, 0), budget):
            phi1 = certify_phase_polynomial(phi1_fun, max(k - 1, 0), budget)
            result = PhaseDecomposition(found=True, phi1=phi1, phi2=phi2,
                                        mode="search", candidates_checked=checked)
            if not result.verify(phi.base, q):
                raise StructuralFailureError("search split failed to verify")
            return result
    return PhaseDecomposition(found=False, phi1=None, phi2=None, mode="search",
                              candidates_checked=checked)


def _multi_indices(rank: int, k: int) -> list[tuple[int, ...]]:
    out = [r for r in itertools.product(range(k + 1), repeat=rank)
           if sum(r) <= k]
    out.sort(key=lambda r: (sum(1 for x in r if x), sum(r), r))
    return out


@dataclass
class CorrelationReport:
    """Outcome of an inverse correlation search over height extensions."""

    group_orders: tuple[int, ...]
    k: int
    q: int
    ext_cap: int
    seed: int
    norm_gate: dict
    heights: list[dict] = field(default_factory=list)
    best: dict | None = None
    complete: bool = True

    def payload(self) -> dict:
        return {
            "group": list(self.group_orders), "k": self.k, "q": self.q,
            "ext_cap": self.ext_cap, "seed": self.seed,
            "norm_gate": self.norm_gate, "heights": self.heights,
            "best": self.best, "complete": self.complete,
        }


def inverse_search(f: GroupFunction, k: int, q: int, ext_cap: int,
                   budget: int = 1 << 16, seed: int = 0,
                   norm_floor: float = 0.0,
                   delta_threshold: float = 0.0) -> CorrelationReport:
    """Search height extensions for a degree-k phase polynomial correlating with f.

    For each height i up to the cap, candidates are coefficient-form phase
    functions on the canonical extension with phases in multiples of 1/q^i,
    ordered by number of nonzero coefficients then lexicographically, each
    certified before its correlation counts.  Exhaustive when the candidate
    count fits the budget, else a seeded random sample; the winning correlation
    is recomputed independently.
    """
    A = f.group
    report = CorrelationReport(group_orders=A.cyclic_orders, k=k, q=q,
                               ext_cap=ext_cap, seed=seed,
                               norm_gate={"floor": norm_floor})
    norm = gowers_norm(f, k + 1)
    report.norm_gate["norm"] = norm
    if norm < norm_floor:
        report.norm_gate["skipped"] = True
        return report
    report.norm_gate["skipped"] = False
    rng = random.Random(seed)
    best_overall = None
    from .groups import height_extension as _hx
    for i in range(1, ext_cap + 1):
        ext = _hx(A, i)
        B = ext.total
        lifted = lift_function(f, ext)
        order = q ** i
        positions = _multi_indices(len(B.cyclic_orders), k)
        total = order ** len(positions)
        exhaustive = total <= budget
        height_stats = {"height": i, "total_orders": list(B.cyclic_orders),
                        "candidates": 0, "certified": 0,
                        "exhaustive": exhaustive, "candidate_space": total}
        best_here = None

        def consider(theta_vec):
            nonlocal best_here
            coeffs = {r: Fraction(t, order)
                      for r, t in zip(positions, theta_vec) if t}
            phi = binomial_phase_function(B, coeffs)
            height_stats["candidates"] += 1
            if not is_phase_polynomial(phi, k):
                return
            height_stats["certified"] += 1
            corr = correlation(lifted, phi)
            mag = abs(corr)
            if best_here is None or mag > best_here[0] + NORM_TOL:
                best_here = (mag, corr, coeffs, phi)

        if exhaustive:
            for nnz in range(len(positions) + 1):
                for chosen in itertools.combinations(range(len(positions)), nnz):
                    for vals in itertools.product(range(1, order), repeat=nnz):
                        theta = [0] * len(positions)
                        for pos, v in zip(chosen, vals):
                            theta[pos] = v
                        consider(theta)
        else:
            for _ in range(budget):
                consider([rng.randrange(order) for _ in positions])
            report.complete = False
        if best_here is not None:
            mag, corr, coeffs, phi = best_here
            check = _correlation_plain(lifted, phi)
            if abs(check - corr) > NORM_TOL:
                raise StructuralFailureError(
                    "correlation recomputation disagrees", witness=(corr, check))
            height_stats["best"] = {
                "magnitude": mag,
                "correlation": [corr.real, corr.imag],
                "coefficients": {",".join(map(str, r)): str(th)
                                 for r, th in coeffs.items()},
                "phases": [str(p) for p in phi.exact_phases],
            }
            if best_overall is None or mag > best_overall[0] + NORM_TOL:
                best_overall = (mag, i, height_stats["best"])
        report.heights.append(height_stats)
    if best_overall is not None:
        mag, height, data = best_overall
        report.best = dict(data)
        report.best["height"] = height
        report.best["clears_delta"] = bool(mag >= delta_threshold)
    return report


def tz_residue_check(p4: PolyMap, p: int, k: int,
                     radius: int | None = None) -> bool:
    """Is a prime-root binomial phase form invariant under shifting any
    coordinate by p on the test window?

    The form must have all terms of total degree exactly k and take values in
    the order-p cyclic group; the window has the given radius (default 2p) in
    every coordinate.
    """
    if p < 2:
        raise InvalidArgumentError("p must be a prime >= 2")
    if p4.target.cyclic_orders != (p,):
        raise InvalidArgumentError("form must take values in the order-p group")
    for r, _ in p4.coeffs:
        if sum(r) != k:
            raise InvalidArgumentError("all terms must have total degree k")
    radius = 2 * p if radius is None else radius
    window = range(-radius, radius + 1)
    for x in itertools.product(window, repeat=p4.arity):
        base = p4.evaluate(x)
        for j in range(p4.arity):
            shifted = list(x)
            shifted[j] += p
            if p4.evaluate(shifted) != base:
                return False
    return True
