import numpy as np
import pytest

from icewave.dispersion import omega_sq, sample
from icewave.euler import (
    DnoConfig,
    EulerSolver,
    bending_force,
    curvature,
    diagnostics_euler,
    dno_apply,
    dno_terms,
    rhs_nonlinear,
)
from icewave.model import IceParams, SurfaceState, make_grid

P1 = IceParams(compression=1.0)


# spectral operator helpers for the printed low-order formulas (test-local
# oracle, deliberately built from operator composition rather than the
# recursion under test)

def op_D(f, grid):
    # -i d/dx maps real fields to imaginary ones: stay complex inside
    # compositions and take the real part only at the end
    k = grid.wavenumbers.copy()
    k[grid.nyquist_index] = 0.0
    return np.fft.ifft(k * np.fft.fft(f))


def op_absD(f, grid):
    return np.fft.ifft(np.abs(grid.wavenumbers) * np.fft.fft(f))


def printed_g1(eta, xi, grid):
    out = op_D(eta * op_D(xi, grid), grid) - op_absD(eta * op_absD(xi, grid), grid)
    return out.real


def printed_g2(eta, xi, grid):
    def absD2(f):
        return np.fft.ifft(grid.wavenumbers**2 * np.fft.fft(f))

    t1 = absD2(eta**2 * op_absD(xi, grid))
    t2 = op_absD(eta**2 * absD2(xi), grid)
    t3 = op_absD(eta * op_absD(eta * op_absD(xi, grid), grid), grid)
    return (-0.5 * (t1 + t2 - 2 * t3)).real


class TestDno:
    def test_flat_surface_is_absD(self):
        grid = make_grid(2 * np.pi * 4, 64)
        xi = np.cos(3 * grid.dk * grid.x) + 0.5 * np.sin(5 * grid.dk * grid.x)
        got = dno_apply(np.zeros(64), xi, DnoConfig(order=4), grid)
        assert np.allclose(got, op_absD(xi, grid), atol=1e-13)

    def test_first_order_matches_printed_formula(self):
        grid = make_grid(2 * np.pi * 4, 64)
        eta = 0.05 * np.cos(2 * grid.dk * grid.x)
        xi = np.cos(3 * grid.dk * grid.x)
        terms = dno_terms(eta, xi, 1, grid)
        assert np.allclose(terms[1], printed_g1(eta, xi, grid), atol=1e-12)

    def test_second_order_matches_printed_formula(self):
        grid = make_grid(2 * np.pi * 4, 64)
        eta = 0.05 * np.cos(2 * grid.dk * grid.x) + 0.02 * np.sin(grid.dk * grid.x)
        xi = np.cos(3 * grid.dk * grid.x)
        terms = dno_terms(eta, xi, 2, grid)
        assert np.allclose(terms[2], printed_g2(eta, xi, grid), atol=1e-12)

    @pytest.mark.parametrize("order", [1, 2, 3, 4, 5, 6])
    def test_self_adjoint(self, order):
        # truncated-operator self-adjointness is exact only when no product
        # aliases: (order+1)-fold products of |p| <= 4 stay inside N/2 = 32
        grid = make_grid(50.0, 64)
        rng = np.random.default_rng(order)

        def banded(scale):
            spec = np.zeros(64, complex)
            m = (np.abs(grid.modes) >= 1) & (np.abs(grid.modes) <= 4)
            spec[m] = rng.normal(size=m.sum()) + 1j * rng.normal(size=m.sum())
            f = np.fft.ifft(spec * 64).real
            return scale * f / np.abs(f).max()

        eta = banded(0.05)
        xi1, xi2 = banded(1.0), banded(1.0)
        cfg = DnoConfig(order=order)
        lhs = (xi1 * dno_apply(eta, xi2, cfg, grid)).sum()
        rhs = (xi2 * dno_apply(eta, xi1, cfg, grid)).sum()
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_order_convergence_geometric(self):
        # different carrier wavenumbers for elevation and potential, so no
        # term vanishes by the travelling-pair degeneracy
        grid = make_grid(2 * np.pi * 8, 128)
        eta = 0.15 * np.cos(8 * grid.dk * grid.x)        # slope 0.15
        xi = np.sin(7 * grid.dk * grid.x)
        terms = dno_terms(eta, xi, 7, grid)
        norm = np.linalg.norm(sum(terms))
        sizes = [np.linalg.norm(terms[j]) / norm for j in range(1, 8)]
        ratios = [sizes[i + 1] / sizes[i] for i in range(len(sizes) - 1)]
        assert all(r < 0.5 for r in ratios)


class TestCurvatureBending:
    def test_zero(self):
        grid = make_grid(10.0, 32)
        assert np.all(curvature(np.zeros(32), grid) == 0)
        assert np.all(bending_force(np.zeros(32), grid) == 0)

    def test_linearized_curvature(self):
        grid = make_grid(2 * np.pi, 64)
        a, k = 1e-3, 1.0
        eta = a * np.cos(k * grid.x)
        kap = curvature(eta, grid)
        assert np.allclose(kap, -a * k**2 * np.cos(k * grid.x), atol=5 * a**3)

    def test_against_refined_grid(self):
        # finite differences on an 8x finer sampling of the same analytic
        # profile as the independent oracle
        a, k = 0.3, 1.0
        grid = make_grid(2 * np.pi, 64)
        fine = make_grid(2 * np.pi, 512)
        eta_f = a * np.cos(k * fine.x)
        d1 = np.gradient(eta_f, fine.dx, edge_order=2)
        # periodic-aware central differences
        d1 = (np.roll(eta_f, -1) - np.roll(eta_f, 1)) / (2 * fine.dx)
        d2 = (np.roll(eta_f, -1) - 2 * eta_f + np.roll(eta_f, 1)) / fine.dx**2
        kap_f = d2 / (1 + d1**2) ** 1.5
        got = curvature(a * np.cos(k * grid.x), grid)
        assert np.allclose(got, kap_f[::8], atol=2e-4)

    def test_linearized_bending(self):
        grid = make_grid(2 * np.pi, 64)
        a, k = 1e-4, 2.0
        eta = a * np.cos(k * grid.x)
        got = bending_force(eta, grid)
        # curvature ~ eta_xx, so the linear part is the fourth derivative
        assert np.allclose(got, a * k**4 * np.cos(k * grid.x), atol=50 * a**2)

    def test_bending_combination_is_cubic(self):
        # the stepper subtracts the linear fourth derivative; what remains
        # must vanish at third order in the amplitude
        grid = make_grid(2 * np.pi, 128)
        k = 1.0
        amps = [0.01, 0.03, 0.1]
        norms = []
        for a in amps:
            eta = a * np.cos(k * grid.x)
            eta_xxxx = np.fft.ifft(grid.wavenumbers**4 * np.fft.fft(eta)).real
            norms.append(np.linalg.norm(bending_force(eta, grid) - eta_xxxx))
        slope = np.polyfit(np.log(amps), np.log(norms), 1)[0]
        assert slope >= 2.9


class TestRhs:
    def test_flat_rest(self):
        grid = make_grid(10.0, 32)
        n1, n2 = rhs_nonlinear(SurfaceState(np.zeros(32), np.zeros(32)), P1,
                               DnoConfig(order=4), grid)
        assert np.allclose(n1, 0, atol=1e-15) and np.allclose(n2, 0, atol=1e-15)

    def test_flat_with_potential(self):
        grid = make_grid(2 * np.pi, 64)
        k = 3.0
        xi = np.cos(k * grid.x)
        n1, n2 = rhs_nonlinear(SurfaceState(np.zeros(64), xi), P1,
                               DnoConfig(order=6), grid)
        xi_x = -k * np.sin(k * grid.x)
        expected = -0.5 * xi_x**2 + 0.5 * (k * np.cos(k * grid.x)) ** 2
        assert np.allclose(n1, 0, atol=1e-13)
        assert np.allclose(n2, expected, atol=1e-12)

    def test_quadratic_smallness(self):
        grid = make_grid(2 * np.pi * 8, 128)
        k0 = 8 * grid.dk
        w = np.sqrt(omega_sq(k0, P1))
        norms = []
        amps = [1e-3, 3e-3, 1e-2]
        for a in amps:
            eta = a * np.cos(k0 * grid.x)
            xi = a * w / k0 * np.sin(k0 * grid.x)
            n1, n2 = rhs_nonlinear(SurfaceState(eta, xi), P1, DnoConfig(order=6), grid)
            norms.append(np.linalg.norm(n1) + np.linalg.norm(n2))
        slope = np.polyfit(np.log(amps), np.log(norms), 1)[0]
        assert slope >= 1.95


class TestStepper:
    def test_flat_is_fixed_point(self):
        grid = make_grid(10.0, 32)
        solver = EulerSolver(grid, P1, dt=0.05)
        out = solver.run(SurfaceState(np.zeros(32), np.zeros(32)), 10)
        assert np.abs(out.eta).max() == 0.0 and np.abs(out.xi).max() == 0.0

    def test_linear_plane_wave_phase(self):
        grid = make_grid(2 * np.pi * 8, 64)
        k = 5 * grid.dk
        s = sample(k, P1)
        a = 0.3
        dt = 0.02
        steps = 1000
        state = SurfaceState(a * np.cos(k * grid.x), a * s.omega / k * np.sin(k * grid.x))
        solver = EulerSolver(grid, P1, dt=dt, linear_only=True)
        out = solver.run(state, steps)
        t = steps * dt
        expected = a * np.cos(k * grid.x - s.omega * t)
        assert np.abs(out.eta - expected).max() / a < 1e-10
        expected_xi = a * s.omega / k * np.sin(k * grid.x - s.omega * t)
        assert np.abs(out.xi - expected_xi).max() / a < 1e-10

    def test_crest_speed_of_small_wave(self):
        grid = make_grid(20 * np.pi, 128)
        k0 = 0.9
        assert abs(k0 / grid.dk - round(k0 / grid.dk)) < 1e-12
        s = sample(k0, P1)
        a = 1e-3
        state = SurfaceState(a * np.cos(k0 * grid.x), a * s.omega / k0 * np.sin(k0 * grid.x))
        solver = EulerSolver(grid, P1, dt=0.02)
        # phase of the carrier mode tracks -omega t; crest speed = omega/k.
        # sample once per quarter period so unwrapping is unambiguous
        period = 2 * np.pi / s.omega
        quarter = int(round(period / 4 / 0.02))
        phases = [np.angle(np.fft.fft(state.eta)[grid.mode_index(k0)])]
        out = state
        for _ in range(4):
            out = solver.run(out, quarter)
            phases.append(np.angle(np.fft.fft(out.eta)[grid.mode_index(k0)]))
        dph = np.unwrap(phases)[-1] - phases[0]
        speed = -dph / (4 * quarter * 0.02) / k0
        assert speed == pytest.approx(s.c, rel=5e-3)

    def test_timestep_convergence_order(self):
        grid = make_grid(2 * np.pi * 8, 64)
        k0 = 8 * grid.dk
        s = sample(k0, P1)
        a = 0.05
        state = SurfaceState(a * np.cos(k0 * grid.x), a * s.omega / k0 * np.sin(k0 * grid.x))
        ref = EulerSolver(grid, P1, dt=0.2 / 64).run(state.copy(), 64)
        errs = []
        dts = [0.1, 0.05, 0.025]
        for dt in dts:
            out = EulerSolver(grid, P1, dt=dt).run(state.copy(), int(round(0.2 / dt)))
            errs.append(np.linalg.norm(out.eta - ref.eta) / np.linalg.norm(ref.eta))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert slope == pytest.approx(4.0, abs=0.4)

    def test_zero_mass_enforced(self):
        grid = make_grid(2 * np.pi * 8, 64)
        rng = np.random.default_rng(2)
        state = SurfaceState(0.01 * rng.normal(size=64), 0.01 * rng.normal(size=64))
        out = EulerSolver(grid, P1, dt=0.02).run(state, 5)
        assert abs(out.eta.mean()) < 1e-15

    def test_dealias_flag_runs_and_agrees(self):
        grid = make_grid(2 * np.pi * 8, 64)
        k0 = 8 * grid.dk
        s = sample(k0, P1)
        a = 1e-3
        state = SurfaceState(a * np.cos(k0 * grid.x), a * s.omega / k0 * np.sin(k0 * grid.x))
        plain = EulerSolver(grid, P1, dt=0.05).run(state.copy(), 20)
        padded = EulerSolver(grid, P1, dt=0.05, dealias=True).run(state.copy(), 20)
        assert np.abs(plain.eta - padded.eta).max() < 1e-10


class TestDiagnostics:
    def test_flat_rest(self):
        grid = make_grid(10.0, 32)
        d = diagnostics_euler(SurfaceState(np.zeros(32), np.zeros(32)), P1,
                              DnoConfig(), grid)
        assert d.hamiltonian == 0 and d.momentum == 0 and d.volume == 0

    def test_kinetic_energy_single_mode(self):
        # H = 1/2 int xi |D| xi = pi k / 2 for xi = cos(kx) on a 2 pi box
        grid = make_grid(2 * np.pi, 64)
        for k in (1.0, 3.0):
            xi = np.cos(k * grid.x)
            d = diagnostics_euler(SurfaceState(np.zeros(64), xi), P1, DnoConfig(), grid)
            assert d.hamiltonian == pytest.approx(np.pi * k / 2, rel=1e-12)

    def test_invariant_drift_short_run(self):
        grid = make_grid(20 * np.pi, 128)
        k0 = 0.9
        s = sample(k0, P1)
        a = 5e-3
        state = SurfaceState(a * np.cos(k0 * grid.x), a * s.omega / k0 * np.sin(k0 * grid.x))
        cfg = DnoConfig(order=6)
        d0 = diagnostics_euler(state, P1, cfg, grid)
        out = EulerSolver(grid, P1, dt=0.02).run(state, 500)
        d1 = diagnostics_euler(out, P1, cfg, grid)
        assert abs(d1.hamiltonian - d0.hamiltonian) / abs(d0.hamiltonian) < 1e-8
        assert abs(d1.momentum - d0.momentum) / abs(d0.momentum) < 1e-8
        assert abs(d1.volume) < 1e-13
