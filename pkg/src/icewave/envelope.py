"""Envelope models for modulated wavetrains: cubic (NLS) and higher order.

The solved equation, for the complex envelope u(x, t) of the carrier k0
(the steepness factor is absorbed into u, see EnvelopeState), is

    i u_t = w0 u - i w1 u_x - (w2/2) u_xx + alpha |u|^2 u
            + (i w3/6) u_xxx - i beta |u|^2 u_x - (gamma k0^2/2) u |D| |u|^2,

where w0..w3 are the carrier frequency and its derivatives, |D| is the
nonlocal Fourier multiplier |k|, and (alpha, beta, gamma) collect the quartic
mode interactions after the cubic normal-form reduction.  gamma is 1 or 2
according to whether the long-wave modulation triads fall inside the
resonance tube.  Dropping the last three terms gives the cubic model.

The linear part is advanced exactly per mode by an integrating factor built
from the cubic Taylor truncation of the dispersion relation about the
carrier (optionally the full symbol), with classical RK4 on the remaining
nonlinear terms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .dispersion import CarrierDerivatives, carrier_derivatives, omega, omega_sq
from .model import Diagnostics, EnvelopeState, IceParams, SpectralGrid
from .resonance import ResonanceAtlas, chi_geometric, gamma_coefficient

__all__ = [
    "DystheCoefficients",
    "DegenerateCarrierError",
    "BlowUpError",
    "coefficients",
    "cubic_interaction",
    "DystheSolver",
    "step",
    "diagnostics",
]

log = logging.getLogger(__name__)


class DegenerateCarrierError(ValueError):
    """Second-harmonic resonance 2 w(k0) = w(2 k0) degenerates the coefficients."""


class BlowUpError(RuntimeError):
    """Solution left the floating-point range; carries the last valid time."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"solution blew up; last valid time t={time}")


@dataclass(frozen=True)
class DystheCoefficients:
    """Coefficient bundle for the envelope equation at a fixed carrier."""

    k0: float
    alpha: float
    beta: float
    gamma: int
    derivs: CarrierDerivatives
    c0l: float
    c0r: float
    c1l: float
    c1r: float
    c2l: float
    c2r: float
    params: IceParams

    def with_gamma(self, gamma: int) -> "DystheCoefficients":
        """Copy with the mean-flow coefficient overridden (ablation runs)."""
        return replace(self, gamma=gamma)

    def nls_truncation(self) -> "DystheCoefficients":
        """Copy with the higher-order terms removed (cubic model)."""
        d = self.derivs
        return replace(self, beta=0.0, gamma=0,
                       derivs=CarrierDerivatives(d.w0, d.w1, d.w2, 0.0))


def _intermediates(k0: float, params: IceParams):
    """The six quartic-interaction building blocks c0l..c2r at carrier k0."""
    g, P, D = params.g, params.compression, params.bending
    w0sq = omega_sq(k0, params)
    if w0sq <= 0:
        raise DegenerateCarrierError(f"evanescent carrier k0={k0}")
    w0 = np.sqrt(w0sq)
    w2k_sq = omega_sq(2 * k0, params)
    if w2k_sq <= 0:
        raise DegenerateCarrierError(f"evanescent second harmonic at k0={k0}")
    w2k = np.sqrt(w2k_sq)
    if abs(2 * w0 - w2k) < 1e-12 * w2k:
        raise DegenerateCarrierError(
            f"second-harmonic resonance at k0={k0}: 2 w(k0) = w(2 k0)")

    pi = np.pi
    k2, k4 = k0**2, k0**4
    bend = 1.5 * P - 5.0 * D * k2

    c0l = k0**3 / (8 * pi) + k0**6 / (16 * pi * w0sq) * bend
    c0r = (3 * k2 / (16 * pi)
           + k0**6 / (16 * pi * w0sq)
           * (bend * (2 / k0 + (g + P * k2 - 3 * D * k4) / (2 * w0sq)) - 5 * D * k0))

    sum_ch = 2 * w0 + w2k
    dif_ch = 2 * w0 - w2k
    c1l = k0**3 * w0sq / (4 * pi * w2k * sum_ch)
    c2l = -(k0**3) * w0sq / (4 * pi * w2k * dif_ch)

    t_a = (3 * g - 5 * P * k2 + 7 * D * k4) / w0sq
    t_b = (g + 4 * P * k2 - 48 * D * k4) / w2k_sq
    t_c = (g - 12 * P * k2 + 80 * D * k4)
    t_d = (g - 3 * P * k2 + 5 * D * k4)
    c1r = c1l / 2 * (t_a + t_b - t_c / (w2k * sum_ch) - t_d / (w0 * sum_ch))
    c2r = c2l / 2 * (t_a + t_b + t_c / (w2k * dif_ch) - t_d / (w0 * dif_ch))
    return c0l, c0r, c1l, c1r, c2l, c2r


def cubic_interaction(k0: float, params: IceParams) -> float:
    """The cubic self-interaction coefficient alpha, without requiring
    resonance-curve data (the tube correction to alpha vanishes unless the
    second-harmonic triad family itself is resonant)."""
    c0l, _, c1l, _, c2l, _ = _intermediates(k0, params)
    return float(4 * np.pi * (c0l - 0.5 * (c1l + c2l)))


def coefficients(k0: float, params: IceParams, atlas: ResonanceAtlas,
                 eps: float) -> DystheCoefficients:
    """Assemble all envelope-equation coefficients at carrier k0.

    The tube membership of the second-harmonic triad family switches an
    extra correction onto alpha and beta; the long-wave family fixes gamma.
    """
    derivs = carrier_derivatives(k0, params)
    c0l, c0r, c1l, c1r, c2l, c2r = _intermediates(k0, params)

    chi_center = chi_geometric(k0, -2 * k0, k0, atlas)
    if chi_center:
        log.info("second-harmonic triad family at k0=%g is resonant: "
                 "double-membership correction active", k0)
    alpha = 4 * np.pi * (c0l - 0.5 * c1l - 0.5 * (1 - chi_center) * c2l)
    beta = 8 * np.pi * (c0r - 0.5 * c1r - 0.5 * (1 - chi_center) * c2r)
    gamma = gamma_coefficient(k0, atlas, eps)
    return DystheCoefficients(k0=k0, alpha=float(alpha), beta=float(beta), gamma=gamma,
                              derivs=derivs, c0l=c0l, c0r=c0r, c1l=c1l, c1r=c1r,
                              c2l=c2l, c2r=c2r, params=params)


class DystheSolver:
    """Pseudo-spectral integrating-factor RK4 stepper for the envelope models.

    model:
        "dysthe" keeps all terms; "nls" drops the third-derivative,
        cubic-gradient and mean-flow terms (and so also their coefficients).
    full_symbol:
        advance the linear part with the exact dispersion relation evaluated
        at k0 + kappa instead of its cubic Taylor truncation (experimental).
    dealias:
        zero-pad the cubic products by the 1/2 rule.
    """

    def __init__(self, grid: SpectralGrid, coeffs: DystheCoefficients, dt: float,
                 model: str = "dysthe", full_symbol: bool = False, dealias: bool = False):
        if model not in ("dysthe", "nls"):
            raise ValueError(f"unknown model {model!r}")
        coeffs.params.require_admissible()
        self.grid = grid
        self.model = model
        self.coeffs = coeffs if model == "dysthe" else coeffs.nls_truncation()
        self.dt = float(dt)
        self.dealias = dealias

        kap = grid.wavenumbers
        d = self.coeffs.derivs
        if full_symbol:
            sym = omega(np.abs(coeffs.k0 + kap), coeffs.params)
        else:
            sym = d.w0 + d.w1 * kap + 0.5 * d.w2 * kap**2 + d.w3 / 6.0 * kap**3
        self._kappa = kap
        self._abs_kappa = np.abs(kap)
        self._prop_half = np.exp(-1j * sym * (self.dt / 2))
        self._prop_full = self._prop_half**2
        self._iprop_half = np.conj(self._prop_half)
        self._iprop_full = np.conj(self._prop_full)

    # -- nonlinear right-hand side, -i * (cubic terms), in Fourier space
    def _rhs(self, u_hat: np.ndarray) -> np.ndarray:
        c = self.coeffs
        u = np.fft.ifft(u_hat)
        mag = u.real**2 + u.imag**2
        if c.beta == 0.0 and c.gamma == 0:
            # cubic model: branch on coefficient values, not the model name,
            # so a zeroed-out higher-order run takes the identical code path
            nl = c.alpha * mag * u
        else:
            ux = np.fft.ifft(1j * self._kappa * u_hat)
            mean_flow = np.fft.ifft(self._abs_kappa * np.fft.fft(mag)).real
            nl = (c.alpha * mag * u
                  - 1j * c.beta * mag * ux
                  - 0.5 * c.gamma * c.k0**2 * u * mean_flow)
        out = np.fft.fft(nl)
        if self.dealias:
            out = _apply_half_rule(out)
        return -1j * out

    def step(self, state: EnvelopeState) -> EnvelopeState:
        v = np.fft.fft(state.u)
        dt = self.dt
        with np.errstate(over="ignore", invalid="ignore"):
            f1 = self._rhs(v)
            f2 = self._iprop_half * self._rhs(self._prop_half * (v + 0.5 * dt * f1))
            f3 = self._iprop_half * self._rhs(self._prop_half * (v + 0.5 * dt * f2))
            f4 = self._iprop_full * self._rhs(self._prop_full * (v + dt * f3))
            v_new = self._prop_full * (v + dt / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4))
            u_new = np.fft.ifft(v_new)
        if not np.all(np.isfinite(u_new.view(float))):
            raise BlowUpError(state.time)
        return EnvelopeState(u_new, state.carrier, state.steepness, state.time + dt)

    def run(self, state: EnvelopeState, steps: int) -> EnvelopeState:
        for _ in range(steps):
            state = self.step(state)
        return state


def _apply_half_rule(spec: np.ndarray) -> np.ndarray:
    n = spec.size
    cut = n // 4
    spec = spec.copy()
    spec[cut : n - cut] = 0.0
    return spec


def step(state: EnvelopeState, coeffs: DystheCoefficients, dt: float,
         model: str = "dysthe", *, grid: SpectralGrid, **kw) -> EnvelopeState:
    """One RK4 step of the chosen envelope model (convenience wrapper)."""
    return DystheSolver(grid, coeffs, dt, model=model, **kw).step(state)


def diagnostics(state: EnvelopeState, coeffs: DystheCoefficients, *,
                grid: SpectralGrid) -> Diagnostics:
    """Energy, action and momentum of the envelope via the trapezoidal rule
    (which is exact summation on a periodic uniform grid)."""
    u = state.u
    u_hat = np.fft.fft(u)
    kap = grid.wavenumbers
    ux = np.fft.ifft(1j * kap * u_hat)
    uxxx = np.fft.ifft((1j * kap) ** 3 * u_hat)
    mag = u.real**2 + u.imag**2
    mean_flow = np.fft.ifft(np.abs(kap) * np.fft.fft(mag)).real
    im_u_ux = (np.conj(u) * ux).imag

    d = coeffs.derivs
    density = (d.w0 * mag
               + d.w1 * im_u_ux
               + 0.5 * d.w2 * (ux.real**2 + ux.imag**2)
               + 0.5 * coeffs.alpha * mag**2
               - d.w3 / 6.0 * (np.conj(u) * uxxx).imag
               + 0.5 * coeffs.beta * mag * im_u_ux
               - 0.25 * coeffs.gamma * coeffs.k0**2 * mag * mean_flow)
    dx = grid.dx
    return Diagnostics(
        hamiltonian=float(density.sum() * dx),
        action=float(mag.sum() * dx),
        momentum=float((coeffs.k0 * mag + im_u_ux).sum() * dx),
        volume=0.0,
    )
