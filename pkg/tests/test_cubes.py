"""Abstract cubes, morphism enumeration, and the affinity oracle."""
import itertools

import pytest

from nilspace_lab.cubes import (CubeMorphism, Face, Vertex, corner_vertices,
                                enumerate_cube_morphisms, enumerate_faces,
                                h_parity, has_affine_extension)
from nilspace_lab.errors import InvalidArgumentError, ResourceLimitError


def affine_maps_by_oracle(n, m):
    """All vertex tables {0,1}^n -> {0,1}^m admitting an affine extension."""
    out = set()
    for images in itertools.product(range(1 << m), repeat=1 << n):
        if has_affine_extension(n, m, images):
            out.add(images)
    return out


class TestHParity:
    def test_examples(self):
        assert h_parity(Vertex((0, 0, 0))) == 1
        assert h_parity(Vertex((1, 1, 0))) == 1
        assert h_parity(Vertex((1, 1, 1))) == -1

    def test_mask_input(self):
        assert h_parity(0b110) == 1
        assert h_parity(0b111) == -1


class TestCornerVertices:
    def test_small(self):
        assert corner_vertices(1) == [0]
        assert corner_vertices(2) == [0b00, 0b01, 0b10]
        assert len(corner_vertices(3)) == 7

    def test_needs_positive_dim(self):
        with pytest.raises(InvalidArgumentError):
            corner_vertices(0)


class TestEnumerateMorphisms:
    def test_counts(self):
        assert len(list(enumerate_cube_morphisms(1, 1))) == 4
        assert len(list(enumerate_cube_morphisms(2, 1))) == 6
        assert len(list(enumerate_cube_morphisms(0, 1))) == 2

    def test_11_forms(self):
        tables = {m.vertex_table for m in enumerate_cube_morphisms(1, 1)}
        assert tables == {(0, 0), (1, 1), (0, 1), (1, 0)}

    @pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2),
                                     (3, 2)])
    def test_matches_affinity_oracle(self, n, m):
        forms = {mor.vertex_table for mor in enumerate_cube_morphisms(n, m)}
        assert forms == affine_maps_by_oracle(n, m)

    def test_budget(self):
        with pytest.raises(ResourceLimitError):
            list(enumerate_cube_morphisms(8, 8, budget=1000))

    def test_composition_closure(self):
        # the composite of two coordinate-form morphisms is again one with the
        # composed vertex table, exhaustively for small dimensions
        for n, m in ((1, 1), (2, 1), (1, 2)):
            outer = list(enumerate_cube_morphisms(m, 2))
            inner = list(enumerate_cube_morphisms(n, m))
            for f in outer:
                for g in inner:
                    comp = f.compose(g)
                    assert comp.n == n and comp.m == 2
                    assert comp.vertex_table == tuple(
                        f.apply_mask(g.apply_mask(v)) for v in range(1 << n))


class TestFaces:
    def test_vertex_masks(self):
        face = Face(2, ((0, 0),))
        assert face.dim == 1
        assert face.vertices == (0b00, 0b10)

    def test_codim_count(self):
        faces = list(enumerate_faces(3, 1))
        assert len(faces) == 6
        faces2 = list(enumerate_faces(3, 2))
        assert len(faces2) == 12

    def test_full_codim_gives_vertices(self):
        faces = list(enumerate_faces(2, 2))
        assert sorted(f.vertices[0] for f in faces) == [0, 1, 2, 3]


class TestAffinityOracle:
    def test_rejects_xor(self):
        # x XOR y needs a degree-2 term
        table = [0, 1, 1, 0]
        assert not has_affine_extension(2, 1, table)

    def test_accepts_projection(self):
        table = [0, 1, 0, 1]
        assert has_affine_extension(2, 1, table)
