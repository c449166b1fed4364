"""Modular-lift reformulation of the asymmetric TSP with an optimality certificate."""

__version__ = "0.1.0"
