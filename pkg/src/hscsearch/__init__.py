"""Heterogeneous significant community search."""

__version__ = "0.1.0"
