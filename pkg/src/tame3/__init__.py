"""Tame automorphisms of affine 3-space, their valuations and the geometry of the weight space."""

__version__ = "0.1.0"
