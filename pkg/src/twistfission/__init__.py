"""Exact Stokes combinatorics for ramified irregular classes and numerically
verified twisted quasi-Hamiltonian fission spaces."""
from .cyclo import Cyclo
from .exponents import CircleClass, Direction, Exponent, apples, galois_orbit, normalize, ramification
from .stokes import (FormalGroup, IrregularClass, StokesStructure, adjoint_cover, check_descent,
                     formal_group, irregular_class, singular_directions, untwist)
from .twisted import Automorphism, TwistedElement, compose, in_twist_coset, twisted_conjugate
from .fission import FissionModel, FissionPoint, FissionSpace, Tangent, parabolic_span_check
from .fusion import fuse, internally_fused_double, twisted_double
from .assembly import (StokesRepresentation, SurfaceData, assemble, check_representation,
                       leaf_dimension)

__all__ = [
    "Cyclo", "CircleClass", "Direction", "Exponent", "apples", "galois_orbit", "normalize",
    "ramification", "FormalGroup", "IrregularClass", "StokesStructure", "adjoint_cover",
    "check_descent", "formal_group", "irregular_class", "singular_directions", "untwist",
    "Automorphism", "TwistedElement", "compose", "in_twist_coset", "twisted_conjugate",
    "FissionModel", "FissionPoint", "FissionSpace", "Tangent", "parabolic_span_check",
    "fuse", "internally_fused_double", "twisted_double", "StokesRepresentation", "SurfaceData",
    "assemble", "check_representation", "leaf_dimension",
]
