"""Closed-form linear theory: frequencies, mode amplitudes, and speeds.

The squared frequency of a wavenumber k is

    omega^2(k) = |k| (g - P k^2 + D k^4),

with P the compression and D the bending coefficient.  For 0 <= P < 2 (in
rescaled units) this is positive for every nonzero k, so all linear modes
travel.  The phase speed has a single positive minimum, at the wavenumber
where phase and group speeds coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import IceParams

__all__ = [
    "DispersionSample",
    "CarrierDerivatives",
    "EvanescentCarrierError",
    "omega_sq",
    "omega",
    "mode_amplitude",
    "sample",
    "carrier_derivatives",
    "k_min",
]


class EvanescentCarrierError(ValueError):
    """Raised when a carrier wavenumber has non-positive squared frequency."""


def omega_sq(k, params: IceParams):
    """Squared dispersion relation; array-friendly, defined for all real k."""
    k = np.asarray(k, dtype=float)
    ak = np.abs(k)
    return ak * (params.g - params.compression * ak**2 + params.bending * ak**4)


def omega(k, params: IceParams):
    """Frequency of travelling modes; NaN-free only where omega^2 >= 0."""
    return np.sqrt(omega_sq(k, params))


def mode_amplitude(k, params: IceParams):
    """Scaling factor a_k = sqrt(omega_k / |k|) of the diagonalizing modes."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(omega(k, params) / np.abs(k))


@dataclass(frozen=True)
class DispersionSample:
    """Linear-theory quantities at one wavenumber.

    ``omega`` and ``a`` are None for k = 0 and for evanescent parameters
    (omega^2 < 0); downstream code must branch explicitly on those regimes
    rather than propagate NaNs.
    """

    k: float
    omega_sq: float
    omega: float | None
    a: float | None
    c: float | None
    cg: float | None


def sample(k: float, params: IceParams) -> DispersionSample:
    """Evaluate omega^2, omega, a, phase and group speed at one wavenumber."""
    w2 = float(omega_sq(k, params))
    ak = abs(k)
    if w2 <= 0.0 or ak == 0.0:
        # w2 == 0 at k == 0 always; negative w2 marks evanescent modes
        return DispersionSample(k=k, omega_sq=w2, omega=None, a=None, c=None, cg=None)
    w = np.sqrt(w2)
    g, P, D = params.g, params.compression, params.bending
    return DispersionSample(
        k=k,
        omega_sq=w2,
        omega=float(w),
        a=float(np.sqrt(w / ak)),
        c=float(w / ak),
        cg=float((g - 3 * P * ak**2 + 5 * D * ak**4) / (2 * w)),
    )


@dataclass(frozen=True)
class CarrierDerivatives:
    """omega and its first three k-derivatives at a carrier wavenumber."""

    w0: float
    w1: float
    w2: float
    w3: float


def carrier_derivatives(k0: float, params: IceParams) -> CarrierDerivatives:
    """Analytic derivatives of omega(k) = sqrt(gk - P k^3 + D k^5) at k0 > 0.

    Differentiates the closed form directly; the results agree with the
    series coefficients of the frequency around the carrier, and are pinned
    against centered finite differences by the test suite.
    """
    if k0 <= 0:
        raise EvanescentCarrierError(f"carrier must be positive, got {k0}")
    g, P, D = params.g, params.compression, params.bending
    f = g * k0 - P * k0**3 + D * k0**5
    if f <= 0:
        raise EvanescentCarrierError(f"omega^2({k0}) = {f} <= 0: evanescent carrier")
    f1 = g - 3 * P * k0**2 + 5 * D * k0**4
    f2 = -6 * P * k0 + 20 * D * k0**3
    f3 = -6 * P + 60 * D * k0**2
    w = np.sqrt(f)
    w1 = f1 / (2 * w)
    w2 = f2 / (2 * w) - f1**2 / (4 * w**3)
    w3 = f3 / (2 * w) - 3 * f1 * f2 / (4 * w**3) + 3 * f1**3 / (8 * w**5)
    return CarrierDerivatives(w0=float(w), w1=float(w1), w2=float(w2), w3=float(w3))


def k_min(params: IceParams) -> float:
    """Wavenumber of minimum phase speed, where phase and group speeds meet.

    Positive root of g + P k^2 - 3 D k^4 = 0 (quadratic in k^2).
    """
    g, P, D = params.g, params.compression, params.bending
    return float(np.sqrt((P + np.sqrt(P**2 + 12 * g * D)) / (6 * D)))
