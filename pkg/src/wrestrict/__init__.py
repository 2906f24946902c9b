"""Numerical experiments on weighted Fourier restriction to curves and spheres over lattices."""
__version__ = "0.1.0"
