"""Finite cube-structure toolkit: exact group arithmetic, degree structures,
bundles, extensions, free structures, and Gowers-norm experiments."""

__version__ = "0.1.0"

from .groups import (Character, Element, FinAbGroup, GroupExtension,
                     Homomorphism, characters, fiber, height_extension,
                     make_group)
from .cubes import (CubeMorphism, Face, Vertex, corner_vertices,
                    enumerate_cube_morphisms, h_parity, has_affine_extension)
from .cubespace import (AxiomReport, Cubespace, DegreeProductSpace,
                        check_axioms, check_derivmorph, completion_count,
                        dk_structure, is_morphism, linear_structure,
                        point_space, product, subdirect_product)

__all__ = [name for name in dir() if not name.startswith("_")]
