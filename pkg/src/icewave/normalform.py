"""Cubic normal-form transformation and non-perturbative surface synthesis.

The canonical change of variables that removes non-resonant cubic mode
interactions is realized as the unit-"time" flow of an auxiliary quadratic
evolution system in Fourier space,

    d(eta_{-k})/ds =  dK/d(xi_k),      d(xi_{-k})/ds = -dK/d(eta_k),

whose generator K is a cubic form with interaction kernels P, Q, R on
zero-sum triads.  Each kernel divides by the reduced resonance divisor
dt(k1, k3); on near-resonant triads (flagged by the relaxed characteristic
test) a correction built from the complementary frequency product Pi cancels
the vanishing divisor, and the kernels are evaluated there through an exact
algebraic rewrite that divides by Pi instead.

Marching s from 0 to -1 turns a first-harmonic field built from a wave
envelope into the physical surface, bound harmonics included; the opposite
direction maps a physical state to the reduced variables.  The Fourier
integrals cannot be turned into convolutions (the dispersion relation is not
homogeneous in k), so the gradient sums are dense and evaluated by direct
quadrature with the triad coefficients assembled once per grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dispersion import omega, omega_sq
from .model import EnvelopeState, IceParams, SpectralGrid, SurfaceState
from .resonance import ResonanceAtlas, d_tilde

__all__ = [
    "KernelTriple",
    "FlowConfig",
    "FlowConfigError",
    "SmallDivisorError",
    "NormalFormTransform",
    "kernel",
    "k3_gradients",
    "flow",
    "symplectic_modes",
    "surface_from_modes",
    "envelope_to_surface",
]

log = logging.getLogger(__name__)


class SmallDivisorError(ArithmeticError):
    """A non-resonant triad hit a vanishing divisor: the tube/relaxed-test
    widths are inconsistent with the grid."""


class FlowConfigError(ValueError):
    """The step size does not tile the unit s-interval."""


@dataclass(frozen=True)
class KernelTriple:
    """Interaction kernels of one triad: elevation-elevation-potential (p),
    elevation-potential-elevation (q), and potential-potential-potential (r)."""

    p: float
    q: float
    r: float


@dataclass(frozen=True)
class FlowConfig:
    """Controls for the auxiliary s-flow."""

    ds: float = 0.1
    direction: str = "backward"          # "backward": s 0 -> -1, "forward": s -1 -> 0
    delta: float = 1e-6
    dealias: bool = False

    def __post_init__(self):
        if not 0 < self.ds <= 1:
            raise FlowConfigError(f"need 0 < ds <= 1, got {self.ds}")
        steps = round(1.0 / self.ds)
        if abs(steps * self.ds - 1.0) > 1e-9:
            raise FlowConfigError(f"ds={self.ds} does not tile the unit interval")
        if self.direction not in ("backward", "forward"):
            raise FlowConfigError(f"unknown direction {self.direction!r}")

    @property
    def steps(self) -> int:
        return round(1.0 / self.ds)


def _kernel_arrays(K1, K2, K3, params: IceParams, delta: float):
    """Vectorized P, Q, R on zero-sum triads (arrays of equal shape).

    Triads with a zero member contribute nothing (zero-mass convention);
    opposite-signed outer pair likewise.  Near-resonant triads switch to the
    exact rewrite with the complementary product Pi in the denominator.
    """
    K1 = np.asarray(K1, dtype=float)
    K2 = np.asarray(K2, dtype=float)
    K3 = np.asarray(K3, dtype=float)
    g, P_, D = params.g, params.compression, params.bending

    live = (K1 != 0) & (K2 != 0) & (K3 != 0) & (np.sign(K1) == np.sign(K3))
    # prefactor 1 + sgn k1 sgn k3 equals 2 on every live triad
    w1, w2, w3 = omega(K1, params), omega(K2, params), omega(K3, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        a1sq = np.where(K1 != 0, w1 / np.abs(K1), 1.0)
        a3sq = np.where(K3 != 0, w3 / np.abs(K3), 1.0)
        a2sq_inv = np.where(K2 != 0, np.abs(K2) / w2, 0.0)

    chi = np.abs(w1 - w2 + w3) < delta
    dt = d_tilde(K1, K3, params)
    pi_prod = (w1 + w2 + w3) * (w1 + w2 - w3) * (w1 - w2 - w3)

    # divisor health on the plain branch
    scale = np.maximum(1.0, np.abs(4.0 * (g - P_ * K1**2 + D * K1**4)
                                   * (g - P_ * K3**2 + D * K3**4)))
    bad = live & ~chi & (np.abs(dt) < 1e-14 * scale)
    if np.any(bad):
        i = np.argwhere(bad)[0]
        raise SmallDivisorError(
            f"vanishing divisor outside the resonance test at triad "
            f"({K1[tuple(i)]}, {K2[tuple(i)]}, {K3[tuple(i)]}); "
            "tube width and relaxed tolerance are inconsistent")

    safe_dt = np.where(live & ~chi, dt, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_plain = 0.5 / safe_dt * a1sq * (4 * w1 * (w1**2 - w2**2 - w3**2))
        q_plain = 0.25 / safe_dt * (a1sq * a3sq * a2sq_inv) * (8 * w1 * w2 * w3)
        r_plain = 0.25 / safe_dt * a2sq_inv * (4 * w2 * (w1**2 - w2**2 + w3**2))

        # chi branch: identical kernels, rewritten so the denominator is the
        # complementary product Pi (bounded away from zero on these triads)
        k13 = K1 * K3
        safe_pi = np.where(live & chi, pi_prod, 1.0)
        p_res = -0.5 * k13 * a1sq * (w2**2 + 2 * (w3 - w1) * w2
                                     - 3 * w1**2 + 2 * w1 * w3 + w3**2) / safe_pi
        q_res = 0.25 * k13 * (a1sq * a3sq * a2sq_inv) * (w2**2 + 2 * (w1 + w3) * w2
                                                         + (w1 - w3) ** 2) / safe_pi
        r_res = 0.25 * k13 * a2sq_inv * (3 * w2**2 + 2 * (w1 + w3) * w2
                                         - (w1 - w3) ** 2) / safe_pi

    p = np.where(live, np.where(chi, p_res, p_plain), 0.0)
    q = np.where(live, np.where(chi, q_res, q_plain), 0.0)
    r = np.where(live, np.where(chi, r_res, r_plain), 0.0)
    return p, q, r


def kernel(k1: float, k2: float, k3: float, params: IceParams,
           atlas: ResonanceAtlas) -> KernelTriple:
    """Interaction kernels of one zero-sum triad (relaxed resonance test from
    the atlas)."""
    scale = max(1.0, abs(k1), abs(k2), abs(k3))
    if abs(k1 + k2 + k3) > 1e-9 * scale:
        raise ValueError(f"triad ({k1}, {k2}, {k3}) does not sum to zero")
    p, q, r = _kernel_arrays(np.array([k1]), np.array([k2]), np.array([k3]),
                             params, atlas.delta)
    return KernelTriple(p=float(p[0]), q=float(q[0]), r=float(r[0]))


class NormalFormTransform:
    """Precomputed triad tables and flow integrator for one grid/parameter set.

    Tables are dense (N, N): row = output ladder index k, column = summation
    index k1, with k2 = -k - k1 clamped to the truncated spectrum.  Triads
    touching the unpaired Nyquist mode are dropped (their count is logged).
    """

    def __init__(self, grid: SpectralGrid, params: IceParams, delta: float = 1e-6):
        params.require_admissible()
        self.grid = grid
        self.params = params
        self.delta = float(delta)

        n = grid.count
        modes = grid.modes                       # FFT order
        dk = grid.dk
        p_out = modes[:, None]                   # output index k
        p_1 = modes[None, :]                     # summation index k1
        p_2 = -p_out - p_1
        nyq = -(n // 2)
        in_range = (p_2 >= nyq) & (p_2 <= n // 2 - 1)
        no_nyquist = (p_out != nyq) & (p_1 != nyq) & (p_2 != nyq)
        valid = in_range & no_nyquist
        dropped = int(np.count_nonzero(in_range & ~no_nyquist))
        if dropped:
            log.debug("normal-form tables: dropped %d Nyquist-coupled triads", dropped)
        self.nyquist_dropped = dropped

        self._idx2 = np.where(valid, p_2 % n, 0).astype(np.intp)
        K = (p_out * dk).astype(float) + np.zeros((n, n))
        K1 = (p_1 * dk).astype(float) + np.zeros((n, n))
        K2 = np.where(valid, p_2, 0).astype(float) * dk

        def masked(arrays):
            return tuple(np.where(valid, a, 0.0) for a in arrays)

        # xi-gradient:  A eta1 eta2 + B xi1 xi2   with
        #   A = P(1,2,k) + Q(1,k,2)
        #   B = R(1,2,k) + R(2,k,1) + R(k,1,2)
        # eta-gradient: C eta1 xi2               with
        #   C = P(1,k,2) + P(k,1,2) + Q(1,2,k) + Q(k,2,1)
        p12k, q12k, r12k = masked(_kernel_arrays(K1, K2, K, params, delta))
        p1k2, q1k2, _ = masked(_kernel_arrays(K1, K, K2, params, delta))
        pk12, _, rk12 = masked(_kernel_arrays(K, K1, K2, params, delta))
        _, _, r2k1 = masked(_kernel_arrays(K2, K, K1, params, delta))
        _, qk21, _ = masked(_kernel_arrays(K, K2, K1, params, delta))

        self._A = p12k + q1k2
        self._B = r12k + r2k1 + rk12
        self._C = p1k2 + pk12 + q12k + qk21

        # permutation sending the coefficient of mode p to mode -p
        self._neg = (-modes) % n
        self._neg[grid.nyquist_index] = grid.nyquist_index

    # ------------------------------------------------------------------
    def gradients(self, eta_hat: np.ndarray, xi_hat: np.ndarray):
        """dK/d(xi_k) and dK/d(eta_k) for every ladder mode k."""
        e2 = eta_hat[self._idx2]
        x2 = xi_hat[self._idx2]
        g_xi = (self._A * e2) @ eta_hat + (self._B * x2) @ xi_hat
        g_eta = (self._C * x2) @ eta_hat
        return g_xi, g_eta

    def _rhs(self, y: np.ndarray) -> np.ndarray:
        g_xi, g_eta = self.gradients(y[0], y[1])
        out = np.empty_like(y)
        out[0] = g_xi[self._neg]
        out[1] = -g_eta[self._neg]
        out[:, self.grid.nyquist_index] = 0.0
        return out

    def flow_hats(self, eta_hat: np.ndarray, xi_hat: np.ndarray, cfg: FlowConfig):
        """March the auxiliary system across one unit of s with RK4."""
        h = -cfg.ds if cfg.direction == "backward" else cfg.ds
        y = np.stack([np.asarray(eta_hat, complex), np.asarray(xi_hat, complex)])
        cut = None
        if cfg.dealias:
            n = self.grid.count
            cut = slice(n // 3, n - n // 3 + 1)
        for _ in range(cfg.steps):
            k1 = self._rhs(y)
            k2 = self._rhs(y + 0.5 * h * k1)
            k3 = self._rhs(y + 0.5 * h * k2)
            k4 = self._rhs(y + h * k3)
            y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if cut is not None:
                y[:, cut] = 0.0
        return y[0], y[1]

    def flow(self, state: SurfaceState, cfg: FlowConfig) -> SurfaceState:
        """Apply the transformation to a physical-space state."""
        n = state.count
        eta_hat, xi_hat = self.flow_hats(state.eta_hat(), state.xi_hat(), cfg)
        eta = np.fft.ifft(eta_hat * n).real
        xi = np.fft.ifft(xi_hat * n).real
        out = SurfaceState(eta, xi, state.time)
        out.apply_zero_mass()
        return out

    # ------------------------------------------------------------------
    def _amplitudes(self) -> np.ndarray:
        kap = self.grid.wavenumbers
        w2 = omega_sq(kap, self.params)
        if np.any(w2[kap != 0] <= 0):
            raise ValueError("evanescent ladder mode: grid/parameters inadmissible")
        a = np.ones_like(kap)
        nz = kap != 0
        a[nz] = np.sqrt(np.sqrt(w2[nz]) / np.abs(kap[nz]))
        return a

    def to_modes(self, state: SurfaceState) -> np.ndarray:
        """Complex mode field z_k = (a_k eta_k + i xi_k / a_k) / sqrt(2)."""
        a = self._amplitudes()
        z = (a * state.eta_hat() + 1j * state.xi_hat() / a) / np.sqrt(2.0)
        z[0] = 0.0
        z[self.grid.nyquist_index] = 0.0
        return z

    def from_modes(self, z_hat: np.ndarray, time: float = 0.0) -> SurfaceState:
        """Invert the diagonalizing map for a real physical state."""
        a = self._amplitudes()
        zneg = np.conj(z_hat[self._neg])
        eta_hat = (z_hat + zneg) / (np.sqrt(2.0) * a)
        xi_hat = -1j * a * (z_hat - zneg) / np.sqrt(2.0)
        eta_hat[0] = 0.0
        xi_hat[0] = 0.0
        eta_hat[self.grid.nyquist_index] = 0.0
        xi_hat[self.grid.nyquist_index] = 0.0
        n = self.grid.count
        return SurfaceState(np.fft.ifft(eta_hat * n).real,
                            np.fft.ifft(xi_hat * n).real, time)

    def envelope_to_surface(self, env: EnvelopeState, cfg: FlowConfig) -> SurfaceState:
        """Physical surface (bound harmonics included) from a wave envelope.

        Builds the first-harmonic transformed state from the envelope and the
        carrier, then inverts the normal form by marching s backward.
        """
        if env.count != self.grid.count:
            raise ValueError("envelope and grid sizes differ")
        self.grid.mode_index(env.carrier)       # carrier must sit on the ladder
        z_phys = env.u * np.exp(1j * env.carrier * self.grid.x)
        z_hat = np.fft.fft(z_phys) / env.count
        z_hat[self.grid.nyquist_index] = 0.0
        z_hat[0] = 0.0
        seed = self.from_modes(z_hat, time=env.time)
        back = FlowConfig(ds=cfg.ds, direction="backward", delta=cfg.delta,
                          dealias=cfg.dealias)
        return self.flow(seed, back)


# ---------------------------------------------------------------------------
# functional wrappers (a fresh transform per call; build one explicitly when
# several operations share a grid)

def k3_gradients(state: SurfaceState, k: int, grid: SpectralGrid, params: IceParams,
                 delta: float = 1e-6):
    """Gradient pair (dK/d(xi_k), dK/d(eta_k)) at one ladder index."""
    nf = NormalFormTransform(grid, params, delta)
    g_xi, g_eta = nf.gradients(state.eta_hat(), state.xi_hat())
    return g_xi[k], g_eta[k]


def flow(state: SurfaceState, cfg: FlowConfig, params: IceParams,
         grid: SpectralGrid) -> SurfaceState:
    return NormalFormTransform(grid, params, cfg.delta).flow(state, cfg)


def symplectic_modes(state: SurfaceState, params: IceParams,
                     grid: SpectralGrid) -> np.ndarray:
    return NormalFormTransform(grid, params).to_modes(state)


def surface_from_modes(z_hat: np.ndarray, params: IceParams, grid: SpectralGrid,
                       time: float = 0.0) -> SurfaceState:
    return NormalFormTransform(grid, params).from_modes(z_hat, time)


def envelope_to_surface(env: EnvelopeState, grid: SpectralGrid, params: IceParams,
                        cfg: FlowConfig) -> SurfaceState:
    return NormalFormTransform(grid, params, cfg.delta).envelope_to_surface(env, cfg)
