"""Factor towers, structure groups, bundle certification, factor maps."""
import pytest

from nilspace_lab.bundles import (factor_nilspace, is_factor_map, sim_classes,
                                  structure_group, verify_degree_bundle)
from nilspace_lab.cubespace import dk_structure, is_morphism, product
from nilspace_lab.errors import InvalidArgumentError, StructuralFailureError
from nilspace_lab.groups import make_group

Z2 = make_group([2])
Z3 = make_group([3])
Z4 = make_group([4])


class TestSimClasses:
    def test_d2_z2_level1_everything(self):
        classes = sim_classes(dk_structure(Z2, 2), 1)
        assert classes == [((0,), (1,))]

    def test_d2_z2_level2_singletons(self):
        classes = sim_classes(dk_structure(Z2, 2), 2)
        assert classes == [((0,),), ((1,),)]

    def test_product_level1_fibers(self):
        N = product(dk_structure(Z4, 1), dk_structure(Z2, 2))
        classes = sim_classes(N, 1)
        assert len(classes) == 4
        # classes are the fibers of the first-coordinate projection
        for cls in classes:
            assert len({pt[0] for pt in cls}) == 1
            assert len(cls) == 2


class TestFactorNilspace:
    def test_f1_of_d2_is_point(self):
        F, proj = factor_nilspace(dk_structure(Z2, 2), 1)
        assert len(F.ground) == 1
        assert set(proj.values()) == set(F.ground)

    def test_f1_of_product_matches_d1(self):
        N = product(dk_structure(Z2, 1), dk_structure(Z2, 2))
        F, _ = factor_nilspace(N, 1)
        D1 = dk_structure(Z2, 1)
        assert len(F.ground) == 2
        # exhaustive cube comparison under the natural identification
        ident = {cls: (cls[0][0],) for cls in F.ground}
        for n in (1, 2, 3):
            fac = {tuple(ident[c] for c in cube)
                   for cube in F.enumerate_cubes(n)}
            ref = set(D1.enumerate_cubes(n))
            assert fac == ref

    def test_top_factor_is_identity(self):
        N = dk_structure(Z3, 2)
        F, proj = factor_nilspace(N, 2)
        assert len(F.ground) == len(N.ground)
        for n in (1, 2):
            assert len(set(F.enumerate_cubes(n))) == \
                len(set(N.enumerate_cubes(n)))


class TestStructureGroup:
    @pytest.mark.parametrize("orders,k", [([2], 1), ([3], 1), ([2], 2),
                                          ([3], 2)])
    def test_top_group_of_degree_structure(self, orders, k):
        A = make_group(orders)
        sg = structure_group(dk_structure(A, k), k, k=k)
        assert sg.group.invariant_factors == A.invariant_factors

    def test_product_level2(self):
        N = product(dk_structure(Z2, 1), dk_structure(Z4, 2))
        sg = structure_group(N, 2, k=2)
        assert sg.group.invariant_factors == (4,)

    def test_product_level1(self):
        N = product(dk_structure(Z2, 1), dk_structure(Z4, 2))
        sg = structure_group(N, 1, k=2)
        assert sg.group.invariant_factors == (2,)

    def test_action_is_free_transitive(self):
        sg = structure_group(dk_structure(Z3, 2), 2, k=2)
        pts = sg.space.ground
        for x in pts:
            orbit = {sg.act(a, x) for a in sg.group.elements}
            assert len(orbit) == sg.group.order


class TestVerifyDegreeBundle:
    def test_d2_z2(self):
        bd = verify_degree_bundle(dk_structure(Z2, 2), k=2)
        assert [sg.group.invariant_factors for sg in bd.structure_groups] == \
            [(), (2,)]

    def test_product(self):
        N = product(dk_structure(Z2, 1), dk_structure(Z2, 2))
        bd = verify_degree_bundle(N, k=2)
        assert [sg.group.invariant_factors for sg in bd.structure_groups] == \
            [(2,), (2,)]

    def test_one_step_abelian(self):
        bd = verify_degree_bundle(dk_structure(Z3, 1), k=1)
        assert [sg.group.invariant_factors for sg in bd.structure_groups] == \
            [(3,)]


class TestIsFactorMap:
    def test_mod2_projection(self):
        N, M = dk_structure(Z4, 1), dk_structure(Z2, 1)
        table = {(x,): (x % 2,) for x in range(4)}
        assert is_factor_map(table, N, M, k=1)

    def test_constant_map_rejected(self):
        D1 = dk_structure(Z2, 1)
        table = {(0,): (0,), (1,): (0,)}
        assert not is_factor_map(table, D1, D1, k=1)

    def test_identity(self):
        D1 = dk_structure(Z2, 1)
        assert is_factor_map({x: x for x in D1.ground}, D1, D1, k=1)

    def test_non_morphism_rejected(self):
        D14 = dk_structure(Z4, 1)
        square = {(x,): ((x * x) % 4,) for x in range(4)}
        with pytest.raises(InvalidArgumentError):
            is_factor_map(square, D14, D14, k=1)

    def test_composition_of_factor_maps(self):
        N8, N4, N2 = dk_structure(make_group([8]), 1), \
            dk_structure(Z4, 1), dk_structure(Z2, 1)
        f = {(x,): (x % 4,) for x in range(8)}
        g = {(x,): (x % 2,) for x in range(4)}
        assert is_factor_map(f, N8, N4, k=1)
        assert is_factor_map(g, N4, N2, k=1)
        comp = {(x,): (x % 2,) for x in range(8)}
        assert is_factor_map(comp, N8, N2, k=1)


class TestTowerCoherence:
    @pytest.mark.parametrize("build", [
        lambda: dk_structure(Z2, 2),
        lambda: product(dk_structure(Z2, 1), dk_structure(Z2, 2)),
        lambda: product(dk_structure(Z4, 1), dk_structure(Z2, 2)),
    ])
    def test_factor_tower_refines(self, build):
        N = build()
        assert len(N.ground) <= 16
        classes1 = sim_classes(N, 1)
        classes2 = sim_classes(N, 2)
        # level-2 classes refine level-1 classes
        for c2 in classes2:
            assert any(set(c2) <= set(c1) for c1 in classes1)

    def test_factor_of_factor(self):
        # the level-1 factor of the level-2 factor equals the level-1 factor
        N = product(dk_structure(Z2, 1), dk_structure(Z2, 2))
        F2, p2 = factor_nilspace(N, 2)
        F1_direct, _ = factor_nilspace(N, 1)
        F1_via, _ = factor_nilspace(F2, 1)
        flattened = {frozenset(x for cls2 in cls1 for x in cls2)
                     for cls1 in F1_via.ground}
        assert flattened == {frozenset(c) for c in F1_direct.ground}
