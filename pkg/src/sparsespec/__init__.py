"""Spectral certificates for one-dimensional Schrodinger operators with
sparse bump potentials."""

__version__ = "0.1.0"

from .logspace import LogReal
from .mat2 import Mat2, Vec2, low
from .potential import (Bump, SparsePotential, example_potential, load_potential,
                        single_bump_potential, validate)
from .transfer import bump_propagator, free_propagator, propagate, total_propagator
from .bounds import certify_zero_energy, cn_lower_bound, theorem_sequence
from .spectral import (dense_spectrum, negative_form_threshold, quadratic_form,
                       shoot_negative_eigenvalue, theta_scan)

__all__ = [
    "LogReal", "Mat2", "Vec2", "low",
    "Bump", "SparsePotential", "example_potential", "load_potential",
    "single_bump_potential", "validate",
    "bump_propagator", "free_propagator", "propagate", "total_propagator",
    "certify_zero_energy", "cn_lower_bound", "theorem_sequence",
    "dense_spectrum", "negative_form_threshold", "quadratic_form",
    "shoot_negative_eigenvalue", "theta_scan",
]
