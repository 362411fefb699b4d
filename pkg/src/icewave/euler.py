"""Pseudo-spectral solver for the full nonlinear surface/ice system.

State is the pair (eta, xi) of surface elevation and velocity-potential
trace.  The normal fluid velocity at the surface enters through the
Dirichlet-Neumann operator, expanded in a convergent Taylor series in the
elevation; each order is assembled with Fourier multipliers and pointwise
products, following the surface-potential recursion

    f0 = xi,   fj = - sum_{m=1..j} (eta^m / m!) |D|^m f_{j-m},
    G_j(eta) xi = sum_{m+i=j} (eta^m/m!) |D|^{m+1} f_i
                  - eta_x sum_{m+i=j-1} (eta^m/m!) d/dx |D|^m f_i,

which reproduces the classical low-order operator formulas term by term.

Time integration splits the dynamics into the exact per-mode linear
propagator (a 2x2 rotation-like matrix in Fourier space) and classical RK4
on the remaining nonlinear terms.  The restoring forces include gravity,
nonlinear bending of the ice sheet (arclength form of the curvature
operator) and in-plane compression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelope import BlowUpError
from .model import Diagnostics, IceParams, SpectralGrid, SurfaceState

__all__ = [
    "DnoConfig",
    "EulerSolver",
    "dno_apply",
    "dno_terms",
    "curvature",
    "bending_force",
    "rhs_nonlinear",
    "step_euler",
    "diagnostics_euler",
]


@dataclass(frozen=True)
class DnoConfig:
    """Series truncation order of the Dirichlet-Neumann expansion."""

    order: int = 6

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"series order must be >= 0, got {self.order}")


def _rfft_wavenumbers(grid: SpectralGrid) -> np.ndarray:
    return np.arange(grid.count // 2 + 1) * grid.dk


def _deriv_multiplier(grid: SpectralGrid) -> np.ndarray:
    # odd-derivative multiplier; the unpaired Nyquist mode is zeroed
    kr = _rfft_wavenumbers(grid)
    mult = 1j * kr
    mult[-1] = 0.0
    return mult


def _dno_term_hats(eta: np.ndarray, xi_hat: np.ndarray, order: int,
                   grid: SpectralGrid) -> list[np.ndarray]:
    """Fourier coefficients of the surface-potential corrections f_j."""
    kr = _rfft_wavenumbers(grid)
    pw = [np.ones_like(eta)]
    for m in range(1, order + 1):
        pw.append(pw[-1] * eta / m)
    f_hats = [xi_hat]
    for j in range(1, order + 1):
        stack = np.array([kr**m * f_hats[j - m] for m in range(1, j + 1)])
        phys = np.fft.irfft(stack, n=grid.count, axis=-1)
        acc = -sum(pw[m] * phys[m - 1] for m in range(1, j + 1))
        f_hats.append(np.fft.rfft(acc))
    return f_hats


def dno_terms(eta: np.ndarray, xi: np.ndarray, order: int,
              grid: SpectralGrid) -> list[np.ndarray]:
    """Individual series terms G_j(eta) xi, j = 0..order, in physical space."""
    kr = _rfft_wavenumbers(grid)
    dmul = _deriv_multiplier(grid)
    xi_hat = np.fft.rfft(xi)
    f_hats = _dno_term_hats(eta, xi_hat, order, grid)
    eta_x = np.fft.irfft(dmul * np.fft.rfft(eta), n=grid.count)
    pw = [np.ones_like(eta)]
    for m in range(1, order + 1):
        pw.append(pw[-1] * eta / m)

    out = []
    for j in range(order + 1):
        up = np.array([kr ** (m + 1) * f_hats[j - m] for m in range(j + 1)])
        up_phys = np.fft.irfft(up, n=grid.count, axis=-1)
        term = sum(pw[m] * up_phys[m] for m in range(j + 1))
        if j >= 1:
            dx = np.array([dmul * kr**m * f_hats[j - 1 - m] for m in range(j)])
            dx_phys = np.fft.irfft(dx, n=grid.count, axis=-1)
            term = term - eta_x * sum(pw[m] * dx_phys[m] for m in range(j))
        out.append(term)
    return out


def dno_apply(eta: np.ndarray, xi: np.ndarray, cfg: DnoConfig,
              grid: SpectralGrid) -> np.ndarray:
    """Truncated Dirichlet-Neumann operator applied to the potential trace."""
    return sum(dno_terms(eta, xi, cfg.order, grid))


def curvature(eta: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Interface curvature eta_xx / (1 + eta_x^2)^(3/2), spectral derivatives."""
    kr = _rfft_wavenumbers(grid)
    eta_hat = np.fft.rfft(eta)
    eta_x = np.fft.irfft(_deriv_multiplier(grid) * eta_hat, n=grid.count)
    eta_xx = np.fft.irfft(-(kr**2) * eta_hat, n=grid.count)
    return eta_xx / (1.0 + eta_x**2) ** 1.5


def bending_force(eta: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Arclength bending operator: second arclength derivative of the
    curvature plus half its cube."""
    dmul = _deriv_multiplier(grid)
    eta_hat = np.fft.rfft(eta)
    eta_x = np.fft.irfft(dmul * eta_hat, n=grid.count)
    slope = np.sqrt(1.0 + eta_x**2)
    kap = curvature(eta, grid)
    inner = np.fft.irfft(dmul * np.fft.rfft(kap), n=grid.count) / slope
    outer = np.fft.irfft(dmul * np.fft.rfft(inner), n=grid.count) / slope
    return outer + 0.5 * kap**3


def rhs_nonlinear(state: SurfaceState, params: IceParams, cfg: DnoConfig,
                  grid: SpectralGrid):
    """Nonlinear residual of the evolution equations (physical space)."""
    kr = _rfft_wavenumbers(grid)
    dmul = _deriv_multiplier(grid)
    eta, xi = state.eta, state.xi
    eta_hat = np.fft.rfft(eta)
    xi_hat = np.fft.rfft(xi)
    eta_x = np.fft.irfft(dmul * eta_hat, n=grid.count)
    eta_xx = np.fft.irfft(-(kr**2) * eta_hat, n=grid.count)
    eta_xxxx = np.fft.irfft(kr**4 * eta_hat, n=grid.count)
    xi_x = np.fft.irfft(dmul * xi_hat, n=grid.count)
    g_xi = dno_apply(eta, xi, cfg, grid)
    g0_xi = np.fft.irfft(kr * xi_hat, n=grid.count)
    kap = curvature(eta, grid)

    n1 = g_xi - g0_xi
    n2 = (-0.5 * xi_x**2
          + 0.5 * (g_xi + eta_x * xi_x) ** 2 / (1.0 + eta_x**2)
          - params.bending * (bending_force(eta, grid) - eta_xxxx)
          - params.compression * (kap - eta_xx))
    return n1, n2


class EulerSolver:
    """Integrating-factor RK4 time stepper for the full system.

    dealias:
        evaluate the nonlinear terms on a 3x zero-padded grid before
        truncating back (the bending force carries high-degree products).
    """

    def __init__(self, grid: SpectralGrid, params: IceParams, dt: float,
                 dno_order: int = 6, dealias: bool = False,
                 linear_only: bool = False):
        params.require_admissible()
        self.grid = grid
        self.params = params
        self.dt = float(dt)
        self.cfg = DnoConfig(order=dno_order)
        self.dealias = dealias
        self.linear_only = linear_only
        self._work_grid = SpectralGrid(grid.length, 3 * grid.count) if dealias else grid

        kr = _rfft_wavenumbers(grid)
        accel = params.g + params.bending * kr**4 - params.compression * kr**2
        w = np.sqrt(kr * accel)
        self._theta = {}
        for tau in (0.5 * dt, -0.5 * dt, dt, -dt):
            c, s = np.cos(w * tau), np.sin(w * tau)
            with np.errstate(divide="ignore", invalid="ignore"):
                t12 = np.where(kr > 0, np.sqrt(kr / accel) * s, 0.0)
                t21 = np.where(kr > 0, -np.sqrt(accel / kr) * s, 0.0)
            c = np.where(kr > 0, c, 1.0)
            # k = 0 degenerates to a shear block: eta frozen, xi ramped
            self._theta[tau] = (c, t12, t21, np.float64(-params.g * tau))

        # precomputed multiplier tables for the fused nonlinear evaluation
        wg = self._work_grid
        kr_w = _rfft_wavenumbers(wg)
        order = self.cfg.order
        self._kr_pows = np.array([kr_w**m for m in range(order + 2)])
        self._dmul = _deriv_multiplier(wg)
        self._kr2 = kr_w**2
        self._kr4 = kr_w**4
        self._kr1 = kr_w

    def _apply_theta(self, v: np.ndarray, tau: float) -> np.ndarray:
        c, t12, t21, ramp0 = self._theta[tau]
        out = np.empty_like(v)
        out[0] = c * v[0] + t12 * v[1]
        out[1] = t21 * v[0] + c * v[1]
        out[0, 0] = v[0, 0]
        out[1, 0] = v[1, 0] + ramp0 * v[0, 0]
        return out

    def _nonlinear(self, v: np.ndarray) -> np.ndarray:
        wg = self._work_grid
        if self.dealias:
            eta_hat = _pad_rfft(v[0], self.grid.count, wg.count)
            xi_hat = _pad_rfft(v[1], self.grid.count, wg.count)
        else:
            eta_hat, xi_hat = v[0], v[1]
        n1_hat, n2_hat = self._rhs_fused(eta_hat, xi_hat)
        out = np.stack([n1_hat, n2_hat])
        if self.dealias:
            out = np.stack([_truncate_rfft(out[0], wg.count, self.grid.count),
                            _truncate_rfft(out[1], wg.count, self.grid.count)])
        # the unpaired Nyquist mode has no consistent odd derivative, so the
        # arclength terms cannot cancel its linear part; treat it as linear
        out[:, -1] = 0.0
        return out

    def _rhs_fused(self, eta_hat: np.ndarray, xi_hat: np.ndarray):
        """Nonlinear residual with batched transforms and precomputed
        multipliers; algebraically identical to rhs_nonlinear."""
        wg = self._work_grid
        n = wg.count
        order = self.cfg.order
        kr_pows, dmul = self._kr_pows, self._dmul
        irfft, rfft = np.fft.irfft, np.fft.rfft

        base = irfft(np.stack([eta_hat, dmul * eta_hat, -self._kr2 * eta_hat,
                               self._kr4 * eta_hat, xi_hat, dmul * xi_hat,
                               self._kr1 * xi_hat]), n=n, axis=-1)
        eta, eta_x, eta_xx, eta_xxxx, xi, xi_x, g0_xi = base

        pw = np.empty((order + 1, n))
        pw[0] = 1.0
        for m in range(1, order + 1):
            pw[m] = pw[m - 1] * eta / m

        f_hats = np.empty((order + 1, eta_hat.size), dtype=complex)
        f_hats[0] = xi_hat
        for j in range(1, order + 1):
            phys = irfft(kr_pows[1 : j + 1] * f_hats[j - 1 :: -1], n=n, axis=-1)
            f_hats[j] = rfft(-np.einsum("mn,mn->n", pw[1 : j + 1], phys))

        cum = np.cumsum(f_hats, axis=0)
        up = irfft(kr_pows[1 : order + 2] * cum[::-1], n=n, axis=-1)
        g_xi = np.einsum("mn,mn->n", pw, up)
        if order >= 1:
            dx = irfft(dmul * kr_pows[:order] * cum[order - 1 :: -1], n=n, axis=-1)
            g_xi = g_xi - eta_x * np.einsum("mn,mn->n", pw[:order], dx)

        slope2 = 1.0 + eta_x**2
        s = np.sqrt(slope2)
        kap = eta_xx / (slope2 * s)
        inner = irfft(dmul * rfft(kap), n=n) / s
        outer = irfft(dmul * rfft(inner), n=n) / s
        bend = outer + 0.5 * kap**3

        n1 = g_xi - g0_xi
        n2 = (-0.5 * xi_x**2
              + 0.5 * (g_xi + eta_x * xi_x) ** 2 / slope2
              - self.params.bending * (bend - eta_xxxx)
              - self.params.compression * (kap - eta_xx))
        both = rfft(np.stack([n1, n2]), axis=-1)
        return both[0], both[1]

    def step(self, state: SurfaceState) -> SurfaceState:
        dt = self.dt
        v = np.stack([np.fft.rfft(state.eta), np.fft.rfft(state.xi)])
        if self.linear_only:
            v_new = self._apply_theta(v, dt)
            v_new[0, 0] = 0.0
            return SurfaceState(np.fft.irfft(v_new[0], n=self.grid.count),
                                np.fft.irfft(v_new[1], n=self.grid.count),
                                state.time + dt)
        with np.errstate(over="ignore", invalid="ignore"):
            f1 = self._nonlinear(v)
            f2 = self._apply_theta(
                self._nonlinear(self._apply_theta(v + 0.5 * dt * f1, 0.5 * dt)), -0.5 * dt)
            f3 = self._apply_theta(
                self._nonlinear(self._apply_theta(v + 0.5 * dt * f2, 0.5 * dt)), -0.5 * dt)
            f4 = self._apply_theta(
                self._nonlinear(self._apply_theta(v + dt * f3, dt)), -dt)
            v_new = self._apply_theta(v + dt / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4), dt)
            v_new[0, 0] = 0.0      # zero-mass gauge
            eta = np.fft.irfft(v_new[0], n=self.grid.count)
            xi = np.fft.irfft(v_new[1], n=self.grid.count)
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(xi))):
            raise BlowUpError(state.time)
        return SurfaceState(eta, xi, state.time + dt)

    def run(self, state: SurfaceState, steps: int) -> SurfaceState:
        for _ in range(steps):
            state = self.step(state)
        return state


def _pad_rfft(spec: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    out = np.zeros(n_to // 2 + 1, dtype=complex)
    out[: spec.size] = spec * (n_to / n_from)
    out[spec.size - 1] *= 0.5       # split the former Nyquist bin
    return out


def _truncate_rfft(spec: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    out = spec[: n_to // 2 + 1] * (n_to / n_from)
    out = out.copy()
    out[-1] = out[-1].real * 2      # fold back onto the unpaired Nyquist mode
    return out


def step_euler(state: SurfaceState, dt: float, params: IceParams,
               cfg: DnoConfig, grid: SpectralGrid) -> SurfaceState:
    """Single step of the full solver (convenience wrapper)."""
    return EulerSolver(grid, params, dt, dno_order=cfg.order).step(state)


def diagnostics_euler(state: SurfaceState, params: IceParams, cfg: DnoConfig,
                      grid: SpectralGrid) -> Diagnostics:
    """Energy, momentum and volume by the trapezoidal rule."""
    eta, xi = state.eta, state.xi
    eta_hat = np.fft.rfft(eta)
    kr = _rfft_wavenumbers(grid)
    eta_x = np.fft.irfft(_deriv_multiplier(grid) * eta_hat, n=grid.count)
    eta_xx = np.fft.irfft(-(kr**2) * eta_hat, n=grid.count)
    xi_x = np.fft.irfft(_deriv_multiplier(grid) * np.fft.rfft(xi), n=grid.count)
    kinetic = 0.5 * xi * dno_apply(eta, xi, cfg, grid)
    potential = 0.5 * (params.g * eta**2
                       + params.bending * eta_xx**2 / (1.0 + eta_x**2) ** 2.5
                       - 2.0 * params.compression * (np.sqrt(1.0 + eta_x**2) - 1.0))
    dx = grid.dx
    return Diagnostics(
        hamiltonian=float((kinetic + potential).sum() * dx),
        action=0.0,
        momentum=float((eta * xi_x).sum() * dx),
        volume=float(eta.sum() * dx),
    )
