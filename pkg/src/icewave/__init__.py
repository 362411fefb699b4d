"""Spectral toolkit for nonlinear hydroelastic waves on deep water.

Subpackages cover linear dispersion analysis, resonant-triad geometry, the
Hamiltonian envelope models (cubic and higher order), a cubic normal-form
transformation with non-perturbative surface reconstruction, a full
pseudo-spectral solver for the primitive equations, sideband stability
predictions, and an experiment harness that compares all of the above from
matched initial data.
"""

from .model import (
    Diagnostics,
    EnvelopeState,
    IceParams,
    SpectralGrid,
    SurfaceState,
    make_grid,
    nondimensionalize,
)

__version__ = "0.1.0"

__all__ = [
    "Diagnostics",
    "EnvelopeState",
    "IceParams",
    "SpectralGrid",
    "SurfaceState",
    "make_grid",
    "nondimensionalize",
    "__version__",
]
