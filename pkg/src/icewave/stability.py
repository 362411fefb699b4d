"""Sideband (modulational) stability of uniform wavetrains.

Linearizing the envelope equation about the uniform solution
u0 = B0 exp(-i (w0 + alpha B0^2) t) with a perturbation at sideband
wavenumber lam gives exponential growth exactly when

    a1 = -(w2/2) lam^2 [ 2 B0^2 (alpha - (gamma k0^2/2) |lam|) + (w2/2) lam^2 ]

is positive, with growth rate sqrt(a1).  All quantities here are expressed
in the same envelope normalization the solvers use (the steepness factor is
absorbed into u, so B0 = A0 sqrt(w0 / (2 k0)) for surface amplitude A0 and
lam is the physical sideband offset).

The product -w2 * alpha decides focusing (positive) versus defocusing at a
given carrier; evaluated at the minimum-phase-speed wavenumber it controls
the existence of small-amplitude solitary wavepackets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import carrier_derivatives, k_min
from .envelope import DystheCoefficients, cubic_interaction
from .model import IceParams

__all__ = ["StabilityQuery", "growth_rate", "bfi", "bfi_curve", "scan"]


@dataclass(frozen=True)
class StabilityQuery:
    """One stability evaluation point: wavetrain, sideband, coefficients."""

    a0: float
    k0: float
    lam: float
    params: IceParams
    coeffs: DystheCoefficients
    eps: float = field(init=False)
    b0: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eps", self.k0 * self.a0)
        w0 = self.coeffs.derivs.w0
        object.__setattr__(self, "b0", self.a0 * np.sqrt(w0 / (2.0 * self.k0)))


def growth_rate(q: StabilityQuery) -> float:
    """Normalized sideband growth rate |Re Omega| / w0; zero when stable."""
    d = q.coeffs.derivs
    lam = abs(q.lam)
    bracket = 2.0 * q.b0**2 * (q.coeffs.alpha - 0.5 * q.coeffs.gamma * q.k0**2 * lam) \
        + 0.5 * d.w2 * lam**2
    a1 = -0.5 * d.w2 * lam**2 * bracket
    return float(np.sqrt(max(a1, 0.0)) / d.w0)


def bfi(k0: float, params: IceParams) -> float:
    """Focusing index -w2 * alpha at carrier k0 (positive means focusing)."""
    d = carrier_derivatives(k0, params)
    return float(-d.w2 * cubic_interaction(k0, params))


def bfi_curve(p_lo: float, p_hi: float, samples: int, g: float = 1.0,
              bending: float = 1.0) -> np.ndarray:
    """Tabulate (compression, k_min, bfi at k_min) over a compression range."""
    out = np.empty((samples, 3))
    for i, P in enumerate(np.linspace(p_lo, p_hi, samples)):
        params = IceParams(g=g, bending=bending, compression=P)
        km = k_min(params)
        out[i] = (P, km, bfi(km, params))
    return out


def scan(k0: float, a0: float, params: IceParams, lam_grid,
         coeffs: DystheCoefficients) -> np.ndarray:
    """Growth rate over a sideband grid; reports |lam| > 0 only (the rate is
    even in lam).  Returns an (n, 2) array of (lam, growth)."""
    lam_grid = np.asarray(lam_grid, dtype=float)
    out = np.empty((lam_grid.size, 2))
    for i, lam in enumerate(lam_grid):
        q = StabilityQuery(a0=a0, k0=k0, lam=float(abs(lam)), params=params, coeffs=coeffs)
        out[i] = (abs(lam), growth_rate(q))
    return out
