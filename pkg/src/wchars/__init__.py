"""Exact and numerical character engine for affine Lie algebras and W-algebras."""

__version__ = "0.1.0"
