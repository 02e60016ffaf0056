"""A desk-scale modular multiphysics finite-element framework."""

__version__ = "0.1.0"
