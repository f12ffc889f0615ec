"""Exact computations with Witt vectors, de Rham-Witt complexes and mod-p K-groups of finite F_p-algebras."""

from .algebra import ArtinAlgebra, build_algebra, ideal_power, quotient_by_ideal
from .dsl import parse_ring
from .errors import WittlabError
from .fields import GF, FiniteField
from .linalg import FiniteAbelianPGroup

__version__ = "0.1.0"


def ring(text: str) -> ArtinAlgebra:
    """Build an algebra from ``GF(q)[x,...]/(f,...)``."""
    return parse_ring(text).to_algebra()


__all__ = ["ArtinAlgebra", "FiniteAbelianPGroup", "FiniteField", "GF", "WittlabError",
           "build_algebra", "ideal_power", "parse_ring", "quotient_by_ideal", "ring"]
