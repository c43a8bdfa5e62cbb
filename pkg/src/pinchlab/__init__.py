"""Pinch points, Landau polynomials and asymptotics of loop integrals."""

__version__ = "0.1.0"
