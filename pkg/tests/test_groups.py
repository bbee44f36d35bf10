"""Group arithmetic, characters, and height extensions."""
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilspace_lab.errors import InvalidArgumentError
from nilspace_lab.groups import (Character, Element, characters, fiber,
                                 height_extension, invariant_form_iso,
                                 make_group)
from nilspace_lab.zlinalg import smith_diagonal, subgroup_order


def snf_invariant_factors(orders):
    """Independent oracle: nontrivial Smith diagonal of diag(orders)."""
    n = len(orders)
    mat = [[orders[i] if i == j else 0 for j in range(n)] for i in range(n)]
    return tuple(sorted(d for d in smith_diagonal(mat) if d > 1))


class TestMakeGroup:
    def test_homocyclic(self):
        G = make_group([2, 2])
        assert G.rank == 2 and G.exponent == 2

    def test_already_normal_form(self):
        G = make_group([2, 4])
        assert G.invariant_factors == (2, 4)
        assert G.rank == 2 and G.exponent == 4

    def test_z6_z4_normal_form(self):
        G = make_group([6, 4])
        assert G.invariant_factors == (2, 12)
        assert G.invariant_factors == snf_invariant_factors([6, 4])
        assert G.rank == 2 and G.exponent == 12

    @pytest.mark.parametrize("orders", [[2, 3], [4, 6], [2, 2, 3], [12, 10]])
    def test_normal_form_matches_snf(self, orders):
        assert make_group(orders).invariant_factors == \
            snf_invariant_factors(orders)

    def test_invalid_orders(self):
        with pytest.raises(InvalidArgumentError):
            make_group([0])
        with pytest.raises(InvalidArgumentError):
            make_group([2, -1])

    def test_order_product_invariant(self):
        for orders in ([2], [6, 4], [2, 3, 5], [8, 12]):
            G = make_group(orders)
            assert math.prod(G.invariant_factors) == math.prod(orders)

    def test_divisibility_chain(self):
        for orders in ([6, 4], [12, 18], [2, 2, 4], [30, 4, 9]):
            inv = make_group(orders).invariant_factors
            assert all(inv[i + 1] % inv[i] == 0 for i in range(len(inv) - 1))


class TestElements:
    @given(st.lists(st.integers(min_value=1, max_value=6), min_size=1,
                    max_size=3),
           st.integers(), st.integers(), st.integers())
    def test_group_laws(self, orders, a, b, c):
        G = make_group(orders)
        r = len(orders)
        x = G.element([a] * r)
        y = G.element([b] * r)
        z = G.element([c] * r)
        assert (x + y) + z == x + (y + z)
        assert x + y == y + x
        assert x + (-x) == G.element(G.zero)
        assert (x - y) + y == x

    def test_element_order(self):
        G = make_group([4, 6])
        assert G.element_order((1, 0)) == 4
        assert G.element_order((2, 3)) == 2
        assert G.element_order((1, 1)) == 12

    def test_scalar_multiple(self):
        G = make_group([5])
        assert 3 * G.element((2,)) == G.element((1,))


class TestCharacters:
    def test_z2_characters(self):
        G = make_group([2])
        chars = list(characters(G))
        values = {tuple(c.value(x) for x in G.elements) for c in chars}
        assert len(chars) == 2
        assert any(all(abs(v - 1) < 1e-12 for v in vals) for vals in values)

    def test_dual_size(self):
        G = make_group([2, 4])
        assert len(list(characters(G))) == 8

    def test_z3_additivity(self):
        G = make_group([3])
        chi = Character(G, (Fraction(1, 3),))
        assert chi.phase((2,)) == Fraction(2, 3)
        assert chi.phase((1,)) + chi.phase((1,)) == chi.phase((2,))

    @given(st.integers(min_value=0, max_value=11),
           st.integers(min_value=0, max_value=11))
    def test_multiplicativity_exact(self, a, b):
        G = make_group([12])
        chi = Character(G, (Fraction(5, 12),))
        assert chi.phase(G.add((a,), (b,))) == \
            (chi.phase((a,)) + chi.phase((b,))) % 1

    def test_denominator_must_divide_order(self):
        G = make_group([4])
        with pytest.raises(InvalidArgumentError):
            Character(G, (Fraction(1, 3),))

    @pytest.mark.parametrize("orders", [[2], [3], [4], [2, 2], [2, 4], [12],
                                        [2, 2, 2], [8, 8]])
    def test_orthogonality_exact_and_float(self, orders):
        G = make_group(orders)
        assert G.order <= 64
        chars = list(characters(G))
        for i, chi in enumerate(chars):
            for chi2 in chars[i + 1:]:
                diff = chi * chi2.conj()
                phases = [diff.phase(x) for x in G.elements]
                # multiset pairing: a nontrivial character hits each value of
                # its image subgroup equally often, so counts must balance
                counts = Counter(phases)
                assert len(counts) > 1
                assert len(set(counts.values())) == 1
                total = sum(chi.value(x) * chi2.value(x).conjugate()
                            for x in G.elements)
                assert abs(total) < 1e-9


class TestHeightExtension:
    def test_z2_height2(self):
        ext = height_extension(make_group([2]), 2)
        assert ext.total.cyclic_orders == (4,)
        assert [ext.proj(b) for b in ext.total.elements] == \
            [(0,), (1,), (0,), (1,)]

    def test_z2_squared(self):
        ext = height_extension(make_group([2, 2]), 2)
        assert ext.total.cyclic_orders == (4, 4)
        for b in ext.total.elements:
            assert ext.proj(b) == (b[0] % 2, b[1] % 2)

    def test_z2_x_z4(self):
        A = make_group([2, 4])
        ext = height_extension(A, 2)
        assert ext.total.cyclic_orders == (8, 16)
        assert ext.total.exponent == 16
        assert 16 % 1 == 0 and A.exponent ** 2 % ext.total.exponent == 0
        assert ext.total.rank == A.rank == 2
        assert ext.proj.is_surjective()

    def test_kernel_order_formula(self):
        for orders, i in (([2], 3), ([2, 2], 2), ([3], 2), ([2, 4], 2)):
            A = make_group(orders)
            ext = height_extension(A, i)
            assert ext.kernel_order == A.exponent ** ((i - 1) * A.rank)
            assert ext.total.order == A.order * ext.kernel_order

    def test_exponent_divides_power(self):
        for orders, i in (([2], 2), ([2, 4], 2), ([6], 2), ([3, 3], 3)):
            A = make_group(orders)
            ext = height_extension(A, i)
            assert (A.exponent ** i) % ext.total.exponent == 0

    def test_height_one_is_isomorphism(self):
        A = make_group([2, 4])
        ext = height_extension(A, 1)
        assert ext.kernel_order == 1
        images = {ext.proj(b) for b in ext.total.elements}
        assert images == set(A.elements)

    def test_invalid_height(self):
        with pytest.raises(InvalidArgumentError):
            height_extension(make_group([2]), 0)

    def test_non_normal_presentation(self):
        # Z_6 x Z_4 has invariant form (2, 12); the extension lives over the
        # original coordinates through an explicit isomorphism
        A = make_group([6, 4])
        ext = height_extension(A, 2)
        assert ext.total.cyclic_orders == (24, 144)
        assert ext.proj.is_surjective()

    def test_invariant_form_iso_bijective(self):
        for orders in ([6, 4], [2, 3], [12], [2, 2, 4]):
            A = make_group(orders)
            iso = invariant_form_iso(A)
            images = {iso(x) for x in iso.source.elements}
            assert len(images) == A.order


class TestFiber:
    def test_z4_over_z2(self):
        ext = height_extension(make_group([2]), 2)
        assert fiber(ext, (0,)) == [(0,), (2,)]
        assert fiber(ext, (1,)) == [(1,), (3,)]

    def test_z4sq_fiber_size(self):
        ext = height_extension(make_group([2, 2]), 2)
        assert len(fiber(ext, (1, 0))) == 4

    def test_fibers_partition(self):
        ext = height_extension(make_group([2, 4]), 2)
        seen = []
        for a in ext.base.elements:
            fib = fiber(ext, a)
            assert len(fib) == ext.kernel_order
            seen.extend(fib)
        assert sorted(seen) == sorted(ext.total.elements)


class TestSubgroupOrder:
    def test_full_group(self):
        assert subgroup_order([(1, 0), (0, 1)], [4, 6]) == 24

    def test_cyclic_subgroup(self):
        assert subgroup_order([(2,)], [8]) == 4

    def test_diagonal(self):
        assert subgroup_order([(1, 1)], [2, 2]) == 2

    def test_trivial(self):
        assert subgroup_order([], [5, 5]) == 1
