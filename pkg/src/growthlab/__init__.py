"""Numerical experiments on group actions on hyperbolic graphs."""

__version__ = "0.1.0"
