"""Exact monomial algebra, KMS states and a representation oracle for Exel systems of integer matrices."""

from .algebra import AlgebraElement, Monomial, normalize
from .lattice import DilationSystem, Lattice
from .measures import Atomic, CoordinateProduct, Haar
from .states import StateKind, StateSpec, StateValue, eval_state

__all__ = [
    "AlgebraElement", "Monomial", "normalize",
    "DilationSystem", "Lattice",
    "Atomic", "CoordinateProduct", "Haar",
    "StateKind", "StateSpec", "StateValue", "eval_state",
]
