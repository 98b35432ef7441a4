"""Exact contractions and deformations of Lie algebras."""

__version__ = "0.1.0"
