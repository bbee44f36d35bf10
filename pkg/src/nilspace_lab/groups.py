"""Exact finite abelian group arithmetic, homomorphisms, characters, extensions.

A group is a direct product of cyclic groups ``Z_{n_1} x ... x Z_{n_s}``.
Elements are residue tuples, characters carry exact rational phases mod 1, and
every operation in this module is exact integer / rational arithmetic.

>>> G = make_group([6, 4])
>>> G.invariant_factors
(2, 12)
>>> G.rank, G.exponent
(2, 12)
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import InvalidArgumentError
from .zlinalg import subgroup_order


def _prime_factorization(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def invariant_factors_of(orders) -> tuple[int, ...]:
    """Invariant-factor normal form d_1 | d_2 | ... | d_r of a product of cyclic groups."""
    by_prime: dict[int, list[int]] = defaultdict(list)
    for n in orders:
        for p, e in _prime_factorization(n).items():
            by_prime[p].append(e)
    rank = max((len(v) for v in by_prime.values()), default=0)
    factors = []
    for slot in range(rank):
        d = 1
        for p, exps in by_prime.items():
            exps_sorted = sorted(exps, reverse=True)
            if slot < len(exps_sorted):
                d *= p ** exps_sorted[slot]
        factors.append(d)
    return tuple(sorted(factors))


@dataclass(frozen=True)
class FinAbGroup:
    """Finite abelian group presented as a product of cyclic groups."""

    cyclic_orders: tuple[int, ...]

    def __post_init__(self):
        if any((not isinstance(n, int)) or n < 1 for n in self.cyclic_orders):
            raise InvalidArgumentError("cyclic orders must be integers >= 1")

    @cached_property
    def order(self) -> int:
        return math.prod(self.cyclic_orders)

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        return invariant_factors_of(self.cyclic_orders)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @cached_property
    def elements(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*[range(n) for n in self.cyclic_orders]))

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {x: i for i, x in enumerate(self.elements)}

    # raw coordinate arithmetic; reduction is applied componentwise
    def reduce(self, coords) -> tuple[int, ...]:
        return tuple(c % n for c, n in zip(coords, self.cyclic_orders, strict=True))

    def add(self, x, y) -> tuple[int, ...]:
        return tuple((a + b) % n for a, b, n in zip(x, y, self.cyclic_orders, strict=True))

    def sub(self, x, y) -> tuple[int, ...]:
        return tuple((a - b) % n for a, b, n in zip(x, y, self.cyclic_orders, strict=True))

    def neg(self, x) -> tuple[int, ...]:
        return tuple((-a) % n for a, n in zip(x, self.cyclic_orders, strict=True))

    def scale(self, m: int, x) -> tuple[int, ...]:
        return tuple((m * a) % n for a, n in zip(x, self.cyclic_orders, strict=True))

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.cyclic_orders)

    def element(self, coords) -> "Element":
        return Element(self, self.reduce(tuple(coords)))

    def index_of(self, coords) -> int:
        return self._index[tuple(coords)]

    def element_order(self, coords) -> int:
        out = 1
        for a, n in zip(coords, self.cyclic_orders, strict=True):
            out = math.lcm(out, n // math.gcd(a, n))
        return out

    def generators(self) -> list[tuple[int, ...]]:
        gens = []
        for j in range(len(self.cyclic_orders)):
            g = [0] * len(self.cyclic_orders)
            g[j] = 1
            gens.append(tuple(g))
        return gens

    def __str__(self):
        if not self.cyclic_orders:
            return "Z_1"
        return " x ".join(f"Z_{n}" for n in self.cyclic_orders)


@dataclass(frozen=True)
class Element:
    """Group element; coordinates are reduced residues."""

    group: FinAbGroup
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", self.group.reduce(self.coords))

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.group, self.group.add(self.coords, other.coords))

    def __sub__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.group, self.group.sub(self.coords, other.coords))

    def __neg__(self) -> "Element":
        return Element(self.group, self.group.neg(self.coords))

    def __rmul__(self, m: int) -> "Element":
        return Element(self.group, self.group.scale(m, self.coords))

    def order(self) -> int:
        return self.group.element_order(self.coords)

    def _check(self, other):
        if self.group != other.group:
            raise InvalidArgumentError("elements of different groups")


def make_group(orders) -> FinAbGroup:
    """Build a group from a list of cyclic orders (each >= 1)."""
    return FinAbGroup(tuple(int(n) for n in orders))


@dataclass(frozen=True)
class Homomorphism:
    """Homomorphism determined by images of the source's cyclic generators."""

    source: FinAbGroup
    target: FinAbGroup
    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.images) != len(self.source.cyclic_orders):
            raise InvalidArgumentError("one image per source generator")
        object.__setattr__(self, "images",
                           tuple(self.target.reduce(im) for im in self.images))
        for n, im in zip(self.source.cyclic_orders, self.images):
            if self.target.scale(n, im) != self.target.zero:
                raise InvalidArgumentError(
                    f"image order must divide the generator order {n}")

    def __call__(self, coords) -> tuple[int, ...]:
        acc = self.target.zero
        for c, im in zip(coords, self.images, strict=True):
            if c:
                acc = self.target.add(acc, self.target.scale(c, im))
        return acc

    def image_order(self) -> int:
        return subgroup_order(self.images, self.target.cyclic_orders)

    def is_surjective(self) -> bool:
        return self.image_order() == self.target.order

    def kernel_size(self) -> int:
        return self.source.order // self.image_order()

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """self after inner: x -> self(inner(x))."""
        if inner.target != self.source:
            raise InvalidArgumentError("composition mismatch")
        return Homomorphism(inner.source, self.target,
                            tuple(self(im) for im in inner.images))


@dataclass(frozen=True)
class Character:
    """Multiplicative character with exact rational phase mod 1.

    chi(x) = exp(2*pi*i * sum_j x_j * phase_coeffs[j]); the denominator of the
    j-th coefficient divides the j-th cyclic order, so additivity is exact.
    """

    group: FinAbGroup
    phase_coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.phase_coeffs) != len(self.group.cyclic_orders):
            raise InvalidArgumentError("one phase coefficient per cyclic factor")
        coeffs = tuple(Fraction(c) % 1 for c in self.phase_coeffs)
        object.__setattr__(self, "phase_coeffs", coeffs)
        for n, c in zip(self.group.cyclic_orders, coeffs):
            if (n * c).denominator != 1:
                raise InvalidArgumentError(
                    "phase denominator must divide the factor order")

    def phase(self, coords) -> Fraction:
        total = Fraction(0)
        for x, c in zip(coords, self.phase_coeffs, strict=True):
            total += x * c
        return total % 1

    def value(self, coords) -> complex:
        return phase_to_complex(self.phase(coords))

    def order(self) -> int:
        return math.lcm(*(c.denominator for c in self.phase_coeffs)) \
            if self.phase_coeffs else 1

    def conj(self) -> "Character":
        return Character(self.group, tuple((-c) % 1 for c in self.phase_coeffs))

    def __mul__(self, other: "Character") -> "Character":
        if self.group != other.group:
            raise InvalidArgumentError("characters of different groups")
        return Character(self.group, tuple((a + b) % 1 for a, b in
                                           zip(self.phase_coeffs, other.phase_coeffs)))


def phase_to_complex(p: Fraction) -> complex:
    import cmath
    return cmath.exp(2j * cmath.pi * float(p))


def characters(G: FinAbGroup):
    """All |G| characters, numerator-lexicographic over the cyclic factors."""
    ranges = [range(n) for n in G.cyclic_orders]
    for nums in itertools.product(*ranges):
        yield Character(G, tuple(Fraction(t, n) for t, n in
                                 zip(nums, G.cyclic_orders)))


@dataclass(frozen=True)
class GroupExtension:
    """Surjection tau: total -> base with kernel of order kernel_order."""

    total: FinAbGroup
    base: FinAbGroup
    proj: Homomorphism
    kernel_order: int

    def __post_init__(self):
        if self.proj.source != self.total or self.proj.target != self.base:
            raise InvalidArgumentError("projection endpoints mismatch")
        if self.total.order != self.base.order * self.kernel_order:
            raise InvalidArgumentError("|total| must equal |base| * |kernel|")

    def kernel(self) -> list[tuple[int, ...]]:
        zero = self.base.zero
        return [b for b in self.total.elements if self.proj(b) == zero]


def _crt_unit(n: int, p: int, e: int) -> int:
    """Unit u in Z_n with u = 1 mod p^e and u = 0 mod n/p^e."""
    q = p ** e
    rest = n // q
    assert math.gcd(q, rest) == 1
    return (rest * pow(rest, -1, q)) % n


def invariant_form_iso(A: FinAbGroup) -> Homomorphism:
    """Explicit isomorphism from the invariant-factor presentation onto A.

    Each invariant factor splits into prime-power parts; parts are routed into
    prime-power slots of A's cyclic factors via CRT units.
    """
    dom = FinAbGroup(A.invariant_factors)
    slots: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for idx, n in enumerate(A.cyclic_orders):
        for p, e in _prime_factorization(n).items():
            slots[(p, e)].append((idx, _crt_unit(n, p, e)))
    used = {key: 0 for key in slots}
    images = []
    for d in A.invariant_factors:
        img = [0] * len(A.cyclic_orders)
        for p, e in _prime_factorization(d).items():
            idx, unit = slots[(p, e)][used[(p, e)]]
            used[(p, e)] += 1
            img[idx] = (img[idx] + unit) % A.cyclic_orders[idx]
        images.append(tuple(img))
    iso = Homomorphism(dom, A, tuple(images))
    assert iso.is_surjective(), "invariant form must map onto the group"
    return iso


def height_extension(A: FinAbGroup, i: int) -> GroupExtension:
    """Canonical extension of A with the same rank and exponent dividing exponent(A)^i.

    Each invariant factor Z_d is replaced by Z_{e^(i-1) * d} (e = exponent of A)
    and reduced componentwise, then routed onto A's own coordinates.
    """
    if i < 1:
        raise InvalidArgumentError("height must be >= 1")
    inv = A.invariant_factors
    e = A.exponent
    total = FinAbGroup(tuple(e ** (i - 1) * d for d in inv))
    iso = invariant_form_iso(A)
    # generator j of total reduces to generator j of the invariant form
    proj = Homomorphism(total, A, iso.images)
    kernel_order = e ** ((i - 1) * len(inv))
    assert total.order == A.order * kernel_order
    assert proj.is_surjective()
    return GroupExtension(total, A, proj, kernel_order)


def fiber(ext: GroupExtension, a) -> list[tuple[int, ...]]:
    """All preimages of a base element under the extension's projection."""
    a = ext.base.reduce(tuple(a))
    out = [b for b in ext.total.elements if ext.proj(b) == a]
    assert len(out) == ext.kernel_order
    return out
