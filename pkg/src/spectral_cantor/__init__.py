"""Spectral triples on the Cantor group and on matrix algebras."""
__version__ = "0.1.0"
