"""Finite spectral triples with (multi)twisted real structures."""

__version__ = "0.1.0"
