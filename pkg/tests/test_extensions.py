"""Extensions, sections, translations, arrow spaces, lifting, cube action."""
import itertools

import pytest

from nilspace_lab.bundles import factor_nilspace
from nilspace_lab.cubespace import dk_structure, point_space, product
from nilspace_lab.errors import (InvalidArgumentError, StructuralFailureError,
                                 UnsupportedCaseError)
from nilspace_lab.extensions import (ArrowSpace, Translation, arrow_space,
                                     cube_action, cyclic_quotient_extension,
                                     find_section, is_translation,
                                     lift_translation,
                                     lift_translation_via_bundle, trans_group,
                                     translation_bundle, translation_violation,
                                     trivial_extension, verify_extension)
from nilspace_lab.groups import make_group

Z2 = make_group([2])
Z3 = make_group([3])
Z4 = make_group([4])


def quotient_z4_z2():
    return cyclic_quotient_extension([4], [2], 1)


class TestVerifyExtension:
    def test_trivial_extension(self):
        ext = trivial_extension(dk_structure(Z2, 1), Z2, 1)
        assert ext.degree == 1
        assert len(ext.total.ground) == 4

    def test_z4_over_z2(self):
        ext = quotient_z4_z2()
        assert ext.group.cyclic_orders == (2,)
        assert ext.certificate["n_upto"] == 3

    def test_broken_projection_fails(self):
        # collapse two fibers: the base cube sets no longer lift coherently
        total = dk_structure(Z4, 1)
        base = dk_structure(Z2, 1)
        bad_proj = {(0,): (0,), (1,): (0,), (2,): (1,), (3,): (1,)}

        def action(a, pt):
            return ((pt[0] + a[0]) % 4,) if pt[0] in (0, 1) else \
                ((pt[0] - 2 + a[0]) % 2 + 2,)

        with pytest.raises(StructuralFailureError):
            verify_extension(total, base, Z2, bad_proj, 1, action)

    def test_fiber_addition_is_top_translation(self):
        # fiberwise addition by any group element is a height-k translation
        ext = quotient_z4_z2()
        for a in ext.group.elements:
            table = {x: ext.action(a, x) for x in ext.total.ground}
            assert is_translation(table, ext.total, ext.degree)


class TestFindSection:
    def test_z4_over_z2_has_none(self):
        res = find_section(quotient_z4_z2())
        assert not res.found
        assert res.exhausted and res.candidates_checked == 4

    def test_trivial_has_section(self):
        ext = trivial_extension(dk_structure(Z2, 1), Z2, 1)
        res = find_section(ext)
        assert res.found
        sec = res.section
        for x in ext.base.ground:
            assert ext.proj[sec[x]] == x

    @pytest.mark.parametrize("orders,group,k", [
        ([2], [2], 1), ([2], [4], 1), ([2, 2], [2], 1), ([2], [2], 2),
        ([3], [3], 1), ([4], [4], 2), ([2], [8], 1),
    ])
    def test_trivial_sections_at_scale(self, orders, group, k):
        base = dk_structure(make_group(orders), k)
        A = make_group(group)
        assert len(base.ground) * A.order <= 16
        res = find_section(trivial_extension(base, A, k))
        assert res.found


class TestTranslations:
    def test_shift_on_d1_z3(self):
        D = dk_structure(Z3, 1)
        shift = {(x,): ((x + 1) % 3,) for x in range(3)}
        assert is_translation(shift, D, 1)

    def test_shift_on_d2_z4_height2(self):
        D = dk_structure(Z4, 2)
        shift = {(x,): ((x + 1) % 4,) for x in range(4)}
        assert is_translation(shift, D, 2)

    def test_doubling_fails_with_witness(self):
        D = dk_structure(Z3, 1)
        double = {(x,): ((2 * x) % 3,) for x in range(3)}
        bad = translation_violation(double, D, 1)
        assert bad is not None
        n, face, cube = bad
        assert n == 2

    def test_trans1_d1_z3_is_shifts(self):
        tg = trans_group(dk_structure(Z3, 1), 1)
        assert tg.candidates_checked == 6
        tables = {tuple(sorted(t.table.items())) for t in tg.translations}
        expected = {tuple(sorted({(x,): ((x + s) % 3,)
                                  for x in range(3)}.items()))
                    for s in range(3)}
        assert tables == expected
        assert tg.closure_ok and tg.higher_contained

    def test_trans2_d2_z2(self):
        tg = trans_group(dk_structure(Z2, 2), 2)
        tables = {tuple(sorted(t.table.items())) for t in tg.translations}
        assert len(tables) == 2  # both shifts

    def test_trans2_d1_z2_identity_only(self):
        tg = trans_group(dk_structure(Z2, 1), 2)
        assert len(tg.translations) == 1
        ident = tg.translations[0].table
        assert all(ident[x] == x for x in ident)


class TestArrowSpace:
    def test_diagonal_pairs(self):
        D = dk_structure(Z2, 1)
        arr = arrow_space(D, 1)
        for c in D.enumerate_cubes(2):
            paired = tuple((x, x) for x in c)
            assert arr.member(2, paired)

    def test_enumeration_matches_membership(self):
        D = dk_structure(Z2, 1)
        arr = arrow_space(D, 1)
        listed = set(arr.enumerate_cubes(1))
        direct = {c for c in itertools.product(arr.ground, repeat=2)
                  if arr.member(1, c)}
        assert listed == direct


class TestTranslationBundle:
    def test_d2_z2_identity_arrow(self):
        N = dk_structure(Z2, 2)
        F1, _ = factor_nilspace(N, 1)
        ident = {F1.ground[0]: F1.ground[0]}
        tb = translation_bundle(ident, N, 1, k=2)
        assert len(tb.arrow.ground) == 4  # all pairs
        assert len(tb.tstar.ground) == 2
        assert tb.extension.degree == 1
        assert tb.extension.group.invariant_factors == (2,)

    def test_degenerate_height_refused(self):
        N = dk_structure(Z2, 1)
        with pytest.raises(UnsupportedCaseError):
            translation_bundle({}, N, 1, k=1)


class TestLiftTranslation:
    def test_shift_lift_z2_to_z4(self):
        ext = quotient_z4_z2()
        swap = {(0,): (1,), (1,): (0,)}
        res = lift_translation(swap, ext, 1)
        assert res.found
        assert res.lift.table == {(0,): (1,), (1,): (2,), (2,): (3,),
                                  (3,): (0,)}
        # the lift covers the base translation
        for x in ext.total.ground:
            assert ext.proj[res.lift(x)] == swap[ext.proj[x]]

    def test_identity_lifts_to_identity(self):
        ext = quotient_z4_z2()
        ident = {x: x for x in ext.base.ground}
        res = lift_translation(ident, ext, 1)
        assert res.found
        assert res.lift.table == {x: x for x in ext.total.ground}

    def test_section_strategy_matches(self):
        N = dk_structure(Z2, 2)
        F1, _ = factor_nilspace(N, 1)
        ident = {F1.ground[0]: F1.ground[0]}
        res = lift_translation_via_bundle(ident, N, 1, k=2)
        assert res.found and res.strategy == "section"

    def test_non_translation_rejected(self):
        ext = quotient_z4_z2()
        with pytest.raises(InvalidArgumentError):
            lift_translation({(0,): (0,), (1,): (1,)}, ext, 0)


class TestCubeAction:
    def setup_method(self):
        self.D = dk_structure(Z3, 1)
        self.shift = Translation.from_dict(
            {(x,): ((x + 1) % 3,) for x in range(3)}, 1)
        self.cube = ((0,), (1,), (1,), (2,))

    def test_zero_exponents_fix(self):
        assert cube_action(self.cube, (0, 0, 0, 0), self.shift, self.D) == \
            self.cube

    def test_constant_exponent_shifts(self):
        acted = cube_action(self.cube, (1, 1, 1, 1), self.shift, self.D)
        assert acted == ((1,), (2,), (2,), (0,))
        assert self.D.member(2, acted)

    def test_face_exponent_matches_face_action(self):
        # exponent 1 on a codimension-1 face, 0 elsewhere
        c = (0, 1, 0, 1)  # face {v_0 = 1}
        acted = cube_action(self.cube, c, self.shift, self.D)
        assert acted == ((0,), (2,), (1,), (0,))

    def test_negative_exponent_uses_inverse(self):
        acted = cube_action(self.cube, (-1, -1, -1, -1), self.shift, self.D)
        assert acted == ((2,), (0,), (0,), (1,))

    def test_rejects_high_degree_exponent(self):
        with pytest.raises(InvalidArgumentError):
            cube_action(self.cube, (0, 0, 0, 1), self.shift, self.D)


class TestTranslationLadder:
    @pytest.mark.parametrize("orders,k", [([2], 1), ([3], 1), ([2], 2)])
    def test_inclusion_and_closure(self, orders, k):
        N = dk_structure(make_group(orders), k)
        for i in (1, k):
            tg = trans_group(N, i)
            assert tg.closure_ok
            assert tg.higher_contained

    def test_commutators_rise(self):
        # commutators of height-1 translations land in height 2
        N = product(dk_structure(Z2, 1), dk_structure(Z2, 2))
        tg = trans_group(N, 1)
        tabs = [t.table for t in tg.translations]
        for a in tabs:
            for b in tabs:
                inv_a = {v: k for k, v in a.items()}
                inv_b = {v: k for k, v in b.items()}
                comm = {x: inv_b[inv_a[b[a[x]]]] for x in a}
                assert is_translation(comm, N, 2)
