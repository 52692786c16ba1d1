"""Exact decorated-tree algebra for the cubic fractional heat equation, plus spectral numerics."""

__version__ = "0.1.0"
