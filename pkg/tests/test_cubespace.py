"""Degree structures, axiom checking, morphisms, products."""
import itertools

import pytest

from nilspace_lab.cubespace import (DegreeProductSpace, alternating_sum_member,
                                    check_axioms, check_derivmorph,
                                    completion_count, constant_only_space,
                                    degree_morphisms, dk_structure,
                                    is_morphism, linear_structure,
                                    morphism_violation, point_space, product,
                                    subdirect_product)
from nilspace_lab.errors import (InvalidArgumentError, InvalidCornerError,
                                 ResourceLimitError)
from nilspace_lab.groups import make_group

Z2 = make_group([2])
Z3 = make_group([3])
Z4 = make_group([4])


def affine_cube_oracle(A, n, cube):
    """Independent oracle: does the map extend to an affine homomorphism?

    Brute-forces the constant and the n direction coefficients over A.
    """
    for coeffs in itertools.product(A.elements, repeat=n + 1):
        ok = True
        for v in range(1 << n):
            acc = coeffs[0]
            for i in range(n):
                if (v >> i) & 1:
                    acc = A.add(acc, coeffs[i + 1])
            if acc != cube[v]:
                ok = False
                break
        if ok:
            return True
    return False


class TestDegreeMembership:
    def test_d1_z2_examples(self):
        D1 = dk_structure(Z2, 1)
        assert D1.member(2, ((0,), (1,), (1,), (0,)))
        assert not D1.member(2, ((0,), (0,), (0,), (1,)))

    def test_d2_z2_all_sixteen(self):
        D2 = dk_structure(Z2, 2)
        cubes = list(D2.enumerate_cubes(2))
        assert len(cubes) == 16
        assert all(D2.member(2, c) for c in
                   itertools.product(D2.ground, repeat=4))

    @pytest.mark.parametrize("orders,k,n", [([2], 1, 2), ([2], 1, 3),
                                            ([3], 1, 2), ([2], 2, 3),
                                            ([4], 1, 2), ([2, 2], 1, 2)])
    def test_spanning_test_equals_full_morphism_oracle(self, orders, k, n):
        A = make_group(orders)
        D = dk_structure(A, k)
        for cube in itertools.product(D.ground, repeat=1 << n):
            assert D.member(n, cube) == alternating_sum_member(A, k, n, cube)

    def test_cube_counts(self):
        D = dk_structure(Z3, 2)
        assert D.cube_count(2) == 3 ** 4  # full below the critical dimension
        assert D.cube_count(3) == 3 ** 7
        assert sum(1 for _ in D.enumerate_cubes(3)) == 3 ** 7


class TestLinearStructure:
    def test_examples(self):
        L = linear_structure(Z2)
        assert L.member(2, ((0,), (1,), (1,), (0,)))
        L4 = linear_structure(Z4)
        assert not L4.member(2, ((0,), (1,), (1,), (3,)))

    @pytest.mark.parametrize("orders", [[2], [3], [4]])
    def test_equals_degree_one(self, orders):
        A = make_group(orders)
        L, D1 = linear_structure(A), dk_structure(A, 1)
        for n in (1, 2, 3):
            for cube in itertools.product(L.ground, repeat=1 << n):
                assert L.member(n, cube) == D1.member(n, cube)

    @pytest.mark.parametrize("orders", [[2], [3], [4]])
    def test_equals_affine_extension_oracle(self, orders):
        A = make_group(orders)
        L = linear_structure(A)
        for n in (1, 2):
            for cube in itertools.product(L.ground, repeat=1 << n):
                assert L.member(n, cube) == affine_cube_oracle(A, n, cube)

    def test_two_face_characterization(self):
        # membership is equivalent to all 2-face alternating sums vanishing
        L = linear_structure(Z4)
        for cube in itertools.product(L.ground, repeat=8):
            sums_ok = True
            for face_bits in itertools.combinations(range(3), 2):
                i, j = face_bits
                free = [b for b in range(3) if b not in face_bits]
                for base in range(2):
                    b0 = base << free[0]
                    v00 = b0
                    v10 = b0 | (1 << i)
                    v01 = b0 | (1 << j)
                    v11 = b0 | (1 << i) | (1 << j)
                    s = (cube[v00][0] - cube[v10][0] - cube[v01][0]
                         + cube[v11][0]) % 4
                    if s:
                        sums_ok = False
            assert L.member(3, cube) == sums_ok


class TestCheckAxioms:
    def test_d1_z2(self):
        rep = check_axioms(dk_structure(Z2, 1), 3)
        assert rep.all_ok and rep.kstep == 1
        assert rep.completion_counts == {1: 2, 2: 1, 3: 1}

    def test_d2_z3(self):
        # unique completion first appears at dimension 3, so 2-step
        rep = check_axioms(dk_structure(Z3, 2), 3)
        assert rep.all_ok and rep.kstep == 2
        rep = check_axioms(dk_structure(Z3, 2), 4)
        assert rep.all_ok and rep.kstep == 2

    def test_step_not_settled(self):
        # at n_upto = 2 every dimension still has 3 completions
        rep = check_axioms(dk_structure(Z3, 2), 2)
        assert rep.all_ok and rep.kstep is None

    def test_ergodicity_failure(self):
        rep = check_axioms(constant_only_space([0, 1]), 2)
        assert not rep.ergodic_ok
        assert rep.counterexample[0] == "ergodicity"

    def test_point_space(self):
        rep = check_axioms(point_space(), 3)
        assert rep.all_ok and rep.kstep == 0

    def test_exact_gluing_matches_brute(self):
        # independent gluing oracle: enumerate corners, test faces, count
        from nilspace_lab.cubespace import _brute_gluing, _exact_gluing
        for space in (dk_structure(Z2, 1), dk_structure(Z2, 2),
                      dk_structure(Z3, 1), dk_structure(Z4, 1)):
            for n in (1, 2, 3):
                ok_e, count_e = _exact_gluing(space, n)
                ok_b, count_b, _ = _brute_gluing(space, n, 1 << 24)
                assert ok_e == ok_b
                assert count_e == count_b


class TestCompletionCount:
    def test_forced_value(self):
        D1 = dk_structure(Z2, 1)
        assert completion_count(D1, ((0,), (1,), (1,))) == 1

    def test_full_dimension(self):
        D2 = dk_structure(Z2, 2)
        for corner in itertools.product(D2.ground, repeat=3):
            assert completion_count(D2, corner) == 2

    def test_unique_at_critical(self):
        D2 = dk_structure(Z2, 2)
        cube = next(iter(D2.enumerate_cubes(3)))
        assert completion_count(D2, cube[:-1]) == 1

    def test_invalid_corner(self):
        D1 = dk_structure(Z4, 1)
        with pytest.raises(InvalidCornerError):
            # 2-face sum already violated inside a face through 0
            corner = ((0,), (1,), (1,), (3,), (0,), (0,), (0,))
            completion_count(D1, corner)


class TestIsMorphism:
    def test_identity(self):
        D1 = dk_structure(Z2, 1)
        assert is_morphism({x: x for x in D1.ground}, D1, D1)

    def test_mod2(self):
        D14, D12 = dk_structure(Z4, 1), dk_structure(Z2, 1)
        table = {(x,): (x % 2,) for x in range(4)}
        assert is_morphism(table, D14, D12, n_upto=3)

    def test_square_map_fails(self):
        D14 = dk_structure(Z4, 1)
        table = {(x,): ((x * x) % 4,) for x in range(4)}
        bad = morphism_violation(table, D14, D14, n_upto=2)
        assert bad is not None
        n, cube, image = bad
        assert D14.member(n, cube) and not D14.member(n, image)


class TestProducts:
    def test_product_flattens(self):
        P = product(dk_structure(Z2, 1), dk_structure(Z2, 2))
        assert len(P.ground) == 4
        assert P.step_hint == 2
        rep = check_axioms(P, 3)
        assert rep.all_ok

    def test_subdirect_graph_of_mod2(self):
        N, K = dk_structure(Z2, 1), dk_structure(Z4, 1)
        F = dk_structure(Z2, 1)
        S = subdirect_product(N, K, {x: x for x in N.ground},
                              {(y,): (y % 2,) for y in range(4)}, F)
        assert len(S.ground) == 4
        assert set(S.ground) == {((y % 2,), (y,)) for y in range(4)}

    def test_subdirect_over_point_is_full_product(self):
        N, K = dk_structure(Z2, 1), dk_structure(Z3, 1)
        P = point_space()
        S = subdirect_product(N, K, {x: () for x in N.ground},
                              {y: () for y in K.ground}, P)
        assert len(S.ground) == 6

    def test_subdirect_rejects_non_morphism(self):
        N = dk_structure(Z4, 1)
        F = dk_structure(Z4, 1)
        square = {(x,): ((x * x) % 4,) for x in range(4)}
        with pytest.raises(InvalidArgumentError):
            subdirect_product(N, N, square, {x: x for x in N.ground}, F)


class TestDerivmorph:
    def test_z2_i2_j1_constants(self):
        rep = check_derivmorph(Z2, Z2, 2, 1, k_upto=2)
        assert len(rep.morphisms) == 2 and rep.ok

    def test_z2_i1_j2_all_maps(self):
        rep = check_derivmorph(Z2, Z2, 1, 2, k_upto=3)
        assert len(rep.morphisms) == 4 and rep.ok

    def test_z3_i3_j1_constants(self):
        rep = check_derivmorph(Z3, Z3, 3, 1)
        assert len(rep.morphisms) == 3 and rep.ok
        assert all(len(set(m)) == 1 for m in rep.morphisms)

    def test_matches_direct_enumeration(self):
        # independent oracle: filter all maps with is_morphism over cube sets
        src, dst = dk_structure(Z2, 1), dk_structure(Z2, 2)
        direct = []
        for images in itertools.product(Z2.elements, repeat=2):
            table = dict(zip(Z2.elements, images))
            if is_morphism(table, src, dst, n_upto=3):
                direct.append(images)
        assert sorted(degree_morphisms(Z2, Z2, 1, 2)) == sorted(direct)


class TestInvariants:
    @pytest.mark.parametrize("orders,k", [([2], 1), ([3], 1), ([4], 1),
                                          ([2, 2], 1), ([2], 2), ([3], 2)])
    def test_fullness_below_critical(self, orders, k):
        A = make_group(orders)
        D = dk_structure(A, k)
        for n in range(1, k + 1):
            assert all(D.member(n, c)
                       for c in itertools.product(D.ground, repeat=1 << n))

    def test_membership_invariant_under_precomposition(self):
        from nilspace_lab.cubes import enumerate_cube_morphisms
        D = dk_structure(Z3, 1)
        cubes = list(D.enumerate_cubes(2))
        for psi in enumerate_cube_morphisms(2, 2):
            table = psi.vertex_table
            for c in cubes[::5]:
                assert D.member(2, tuple(c[t] for t in table))

    def test_enumeration_budget(self):
        with pytest.raises(ResourceLimitError):
            list(dk_structure(Z4, 2).enumerate_cubes(4, budget=100))
