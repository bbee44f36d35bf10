"""Abstract cubes {0,1}^n: vertices, faces, corners, and coordinate-form morphisms.

Vertices are exposed both as bit tuples and as integer bitmasks (bit i of the
mask is coordinate i); enumeration kernels work on masks throughout.
A cube morphism {0,1}^n -> {0,1}^m is stored in coordinate form: every output
coordinate is one of 0, 1, v_j, 1 - v_j.  The independent brute-force oracle
`has_affine_extension` decides extendability to an affine map Z^n -> Z^m and is
used by the tests to validate the coordinate form.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import InvalidArgumentError, ResourceLimitError, candidate_budget

ZERO, ONE, ID, NEG = "0", "1", "v", "1-v"


def popcount(mask: int) -> int:
    return mask.bit_count()


def h_parity(vertex) -> int:
    """(-1)^(sum of coordinates); accepts a bitmask, a bit tuple, or a Vertex."""
    if isinstance(vertex, Vertex):
        mask = vertex.mask
    elif isinstance(vertex, int):
        mask = vertex
    else:
        mask = mask_of_bits(vertex)
    return -1 if popcount(mask) & 1 else 1


def mask_of_bits(bits) -> int:
    mask = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise InvalidArgumentError("vertex bits must be 0 or 1")
        mask |= b << i
    return mask


def bits_of_mask(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(n))


@dataclass(frozen=True)
class Vertex:
    bits: tuple[int, ...]

    @property
    def mask(self) -> int:
        return mask_of_bits(self.bits)

    @property
    def dim(self) -> int:
        return len(self.bits)


def corner_vertices(n: int) -> list[int]:
    """All 2^n - 1 vertex masks except the all-ones vertex."""
    if n < 1:
        raise InvalidArgumentError("corner needs dimension >= 1")
    return list(range((1 << n) - 1))


@dataclass(frozen=True)
class Face:
    """Axis-aligned face of {0,1}^n given by a partial assignment coord -> {0,1}."""

    n: int
    fixed: tuple[tuple[int, int], ...]  # sorted (coordinate, bit) pairs

    @property
    def dim(self) -> int:
        return self.n - len(self.fixed)

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        """Masks of the face's vertices, ordered by the free coordinates."""
        fixed = dict(self.fixed)
        free = [i for i in range(self.n) if i not in fixed]
        base = 0
        for i, b in self.fixed:
            base |= b << i
        out = []
        for w in range(1 << len(free)):
            mask = base
            for t, i in enumerate(free):
                mask |= ((w >> t) & 1) << i
            out.append(mask)
        return tuple(out)


def enumerate_faces(n: int, codim: int):
    """All axis-aligned faces of {0,1}^n of the given codimension."""
    if not 0 <= codim <= n:
        raise InvalidArgumentError("codimension out of range")
    for coords in itertools.combinations(range(n), codim):
        for bits in itertools.product((0, 1), repeat=codim):
            yield Face(n, tuple(zip(coords, bits)))


@dataclass(frozen=True)
class CubeMorphism:
    """Coordinate-form map {0,1}^n -> {0,1}^m extending affinely to Z^n -> Z^m."""

    n: int
    m: int
    coord_forms: tuple[tuple[str, int], ...]  # one (kind, input index) per output

    def __post_init__(self):
        if len(self.coord_forms) != self.m:
            raise InvalidArgumentError("one coordinate form per output")
        for kind, j in self.coord_forms:
            if kind in (ID, NEG) and not 0 <= j < self.n:
                raise InvalidArgumentError("input index out of range")

    def apply_mask(self, mask: int) -> int:
        out = 0
        for k, (kind, j) in enumerate(self.coord_forms):
            if kind == ONE:
                out |= 1 << k
            elif kind == ID:
                out |= ((mask >> j) & 1) << k
            elif kind == NEG:
                out |= (1 - ((mask >> j) & 1)) << k
        return out

    @cached_property
    def vertex_table(self) -> tuple[int, ...]:
        """Image mask for every input mask, indexed 0 .. 2^n - 1."""
        return tuple(self.apply_mask(v) for v in range(1 << self.n))

    def compose(self, inner: "CubeMorphism") -> "CubeMorphism":
        """self after inner: {0,1}^(inner.n) -> {0,1}^(self.m)."""
        if inner.m != self.n:
            raise InvalidArgumentError("composition mismatch")
        forms = []
        for kind, j in self.coord_forms:
            if kind in (ZERO, ONE):
                forms.append((kind, 0))
                continue
            ik, ij = inner.coord_forms[j]
            if kind == ID:
                forms.append((ik, ij))
            else:  # negate the inner form
                flip = {ZERO: ONE, ONE: ZERO, ID: NEG, NEG: ID}
                forms.append((flip[ik], ij))
        return CubeMorphism(inner.n, self.m, tuple(forms))


def enumerate_cube_morphisms(n: int, m: int, budget: int | None = None):
    """All (2n+2)^m coordinate-form morphisms {0,1}^n -> {0,1}^m."""
    if n < 0 or m < 0:
        raise InvalidArgumentError("dimensions must be nonnegative")
    total = (2 * n + 2) ** m
    cap = candidate_budget(budget)
    if total > cap:
        raise ResourceLimitError(
            f"{total} morphisms exceed budget {cap}", needed=total, budget=cap)
    forms = [(ZERO, 0), (ONE, 0)]
    for j in range(n):
        forms.append((ID, j))
    for j in range(n):
        forms.append((NEG, j))
    for combo in itertools.product(forms, repeat=m):
        yield CubeMorphism(n, m, tuple(combo))


def has_affine_extension(n: int, m: int, table) -> bool:
    """Brute-force oracle: does the vertex table extend to an affine map Z^n -> Z^m?

    Solves for integer coefficients coordinatewise from the images of 0 and the
    basis vertices, then verifies the formula on every vertex.
    """
    if len(table) != 1 << n:
        raise InvalidArgumentError("table must list an image per vertex mask")
    for k in range(m):
        g = [((table[v] >> k) & 1) for v in range(1 << n)]
        c0 = g[0]
        coeff = [g[1 << i] - c0 for i in range(n)]
        for v in range(1 << n):
            val = c0 + sum(coeff[i] for i in range(n) if (v >> i) & 1)
            if val != g[v]:
                return False
    return True
