"""Tropical cohomology, semi-stable reductions and monodromy-weight spectral sequences."""

__version__ = "0.1.0"
