"""Numerical laboratory for breathers of nonlinear Schrodinger equations."""

__version__ = "0.1.0"
