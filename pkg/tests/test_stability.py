import numpy as np
import pytest

from icewave.dispersion import k_min
from icewave.envelope import coefficients
from icewave.model import IceParams
from icewave.resonance import build_curve
from icewave.stability import StabilityQuery, bfi, bfi_curve, growth_rate, scan

P1 = IceParams(compression=1.0)


@pytest.fixture(scope="module")
def coeffs_09():
    atlas = build_curve(P1, 1e-3, 10.0, n=512, mu=0.09, delta=1e-6)
    return coefficients(0.9, P1, atlas, eps=0.09)


@pytest.fixture(scope="module")
def coeffs_5():
    atlas = build_curve(P1, 1e-3, 10.0, n=512, mu=0.05, delta=1e-6)
    return coefficients(5.0, P1, atlas, eps=0.05)


class TestGrowthRate:
    def test_zero_sideband(self, coeffs_09):
        q = StabilityQuery(a0=0.1, k0=0.9, lam=0.0, params=P1, coeffs=coeffs_09)
        assert growth_rate(q) == 0.0

    def test_amplitude_relation(self, coeffs_09):
        q = StabilityQuery(a0=0.1, k0=0.9, lam=0.02, params=P1, coeffs=coeffs_09)
        assert q.b0 == pytest.approx(0.1 * np.sqrt(coeffs_09.derivs.w0 / 1.8), rel=1e-14)
        assert q.eps == pytest.approx(0.09)

    def test_argmax_moderate_carrier(self, coeffs_09):
        lams = np.linspace(1e-4, 0.1, 2000)
        rates = [growth_rate(StabilityQuery(0.1, 0.9, lam, P1, coeffs_09)) for lam in lams]
        assert lams[int(np.argmax(rates))] == pytest.approx(0.02, abs=0.005)

    def test_argmax_large_carrier(self, coeffs_5):
        assert coeffs_5.gamma == 1
        lams = np.linspace(1e-3, 0.5, 3000)
        rates = [growth_rate(StabilityQuery(0.01, 5.0, lam, P1, coeffs_5)) for lam in lams]
        assert lams[int(np.argmax(rates))] == pytest.approx(0.1, abs=0.02)

    def test_even_in_lam(self, coeffs_09):
        a = growth_rate(StabilityQuery(0.1, 0.9, 0.015, P1, coeffs_09))
        b = growth_rate(StabilityQuery(0.1, 0.9, -0.015, P1, coeffs_09))
        assert a == b > 0


class TestBfi:
    def test_flexural_gravity_defocusing(self):
        p = IceParams()
        assert bfi(k_min(p), p) == pytest.approx(-0.006, abs=1e-3)

    def test_compressed_focusing(self):
        assert bfi(k_min(P1), P1) == pytest.approx(0.2954, abs=1e-3)

    def test_sign_change_location(self):
        lo, hi = 0.1, 0.8
        f = lambda P: bfi(k_min(IceParams(compression=P)), IceParams(compression=P))
        assert f(lo) < 0 < f(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if f(lo) * f(mid) <= 0:
                hi = mid
            else:
                lo = mid
        assert 0.5 * (lo + hi) == pytest.approx(0.39, abs=0.02)

    def test_curve_table(self):
        tab = bfi_curve(0.0, 1.9, 39)
        assert tab.shape == (39, 3)
        assert tab[0, 2] < 0 < tab[-1, 2]
        # monotone k_min in compression
        assert np.all(np.diff(tab[:, 1]) > 0)


class TestScan:
    def test_all_stable_configuration(self):
        # defocusing carrier at the phase-speed minimum with a tiny train
        p = IceParams()
        atlas = build_curve(p, 1e-3, 10.0, n=256, mu=0.01, delta=1e-6)
        km = k_min(p)
        c = coefficients(km, p, atlas, eps=0.01)
        tab = scan(km, 1e-4 / km, p, np.linspace(0, 0.2, 100), c)
        assert np.all(tab[:, 1] == 0.0)

    def test_instability_grows_with_compression(self):
        peaks = []
        for P in (0.0, 1.0, 1.9):
            p = IceParams(compression=P)
            atlas = build_curve(p, 1e-3, 10.0, n=256, mu=0.09, delta=1e-6)
            c = coefficients(0.9, p, atlas, eps=0.09)
            tab = scan(0.9, 0.1, p, np.linspace(1e-4, 0.2, 500), c)
            peaks.append(tab[:, 1].max())
        assert peaks[0] < peaks[1] < peaks[2]

    def test_band_edges_match_bracket_roots(self, coeffs_09):
        # the growth support is exactly where the bracketed quadratic-in-lam
        # factor of the instability condition is negative
        d = coeffs_09.derivs
        b0 = StabilityQuery(0.1, 0.9, 0.0, P1, coeffs_09).b0
        bracket = lambda lam: (2 * b0**2 * (coeffs_09.alpha - 0.5 * coeffs_09.gamma * 0.81 * lam)
                               + 0.5 * d.w2 * lam**2)
        lams = np.linspace(1e-5, 0.1, 4000)
        tab = scan(0.9, 0.1, P1, lams, coeffs_09)
        grow = tab[:, 1] > 0
        assert np.array_equal(grow, np.array([bracket(l) < 0 for l in lams]))
