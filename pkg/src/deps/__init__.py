"""Discrete Euler-Poincare-Suslov maps for the Suslov top and the Chaplygin sleigh."""

__version__ = "0.1.0"
