"""Spectral constants for finite Hermite combinations, explicit theoretical
bounds, and Galerkin-scale null-controllability studies for quadratic
differential operators."""

__version__ = "0.1.0"

from . import basis, control, estimates, gram, quadratic, regions  # noqa: F401
