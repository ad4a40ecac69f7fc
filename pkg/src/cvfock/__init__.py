"""Truncated Fock-space simulation of non-Gaussian optical state engineering."""
__version__ = "0.1.0"
