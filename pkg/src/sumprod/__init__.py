"""Exact arithmetic in O/p^N and the sum-product toolkit built on it."""
from .ring import Ring, RingElem, RingError, RingParams, make_ring
from .sets import GradedProfile, RingSet, SegmentWitness, gen_set, regularize, segment_search

__version__ = "0.1.0"

__all__ = [
    "GradedProfile", "Ring", "RingElem", "RingError", "RingParams", "RingSet",
    "SegmentWitness", "gen_set", "make_ring", "regularize", "segment_search",
]
