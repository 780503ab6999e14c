"""Fiedler pencils of Rosenbrock system polynomials."""

__version__ = "0.1.0"
