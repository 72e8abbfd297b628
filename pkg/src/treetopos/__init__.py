"""Finite computations in the topos of trees.

Truncated presheaves and their constructions, forcing for the internal logic
with the later modality, guarded recursive types and predicates, a bridge to
bisected ultrametric spaces, and a small language with higher-order store
whose step-indexed model is checked by bounded search.
"""

from .presheaf import (
    GlobalElement, Morphism, Subobject, TruncatedPresheaf, find_iso, fix, is_isomorphic,
    later_obj, n_iso_rank, next_map,
)

__all__ = [
    "GlobalElement", "Morphism", "Subobject", "TruncatedPresheaf", "find_iso", "fix",
    "is_isomorphic", "later_obj", "n_iso_rank", "next_map",
]
