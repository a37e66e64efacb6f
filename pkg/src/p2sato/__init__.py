"""Exact computations for Sato-Tate groups of Jac(y^2 = x^(p^2) - 1)."""

__version__ = "0.1.0"
