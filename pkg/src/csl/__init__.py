"""Contraction-certification and algorithmic-stability laboratory."""

__version__ = "0.1.0"
