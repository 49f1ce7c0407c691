"""Frobenius truncation vs. full spectrum for the singular oscillator

    psi'' + psi'/x - gamma^2/x^2 psi - a/x psi - b x psi - x^2 psi + W psi = 0

with exact truncation polynomials, a Rayleigh-Ritz solver, a finite-difference
oracle and the two Dirac-oscillator scenario maps built on top of them.
"""

from .model import (
    NegativeGammaSquared,
    NonFinite,
    RadialParameters,
    SpectralPoint,
    effective_potential,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "NegativeGammaSquared",
    "NonFinite",
    "RadialParameters",
    "SpectralPoint",
    "effective_potential",
    "validate",
    "__version__",
]
