"""Resonant-triad analysis for the flexural-gravity dispersion relation.

Triads (k1, k2, k3) with k1 + k2 + k3 = 0 and a vanishing signed frequency
sum make the cubic normal-form divisor blow up.  For same-signed k1, k3 the
divisor reduces to a two-variable polynomial

    dt(k1, k3) = k1 k3 (k1+k3)^2 (3P - 5D(k1^2 + k1 k3 + k3^2))^2
                 - 4 (g - P k1^2 + D k1^4)(g - P k3^2 + D k3^4),

whose positive zero set is a single monotone curve with both axes as
asymptotes.  This module samples that curve, measures distances to it (the
"tube" test used by the analysis-side characteristic function), provides the
discrete relaxed characteristic function used inside quadratures, and decides
the mean-flow coefficient gamma of the envelope model by probing the
modulational triad family against the tube.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dispersion import omega, omega_sq
from .model import IceParams

__all__ = [
    "ResonanceAtlas",
    "CurveConstructionError",
    "AmbiguousProbeError",
    "d_tilde",
    "full_mismatch",
    "build_curve",
    "chi_geometric",
    "chi_relaxed",
    "gamma_coefficient",
]

DEFAULT_DELTA = 1e-6
DEFAULT_CURVE_POINTS = 512


class CurveConstructionError(RuntimeError):
    """Root bracketing failed while tracing the resonance curve."""

    def __init__(self, k1: float, message: str = ""):
        self.k1 = k1
        super().__init__(message or f"could not bracket the resonant partner of k1={k1}")


class AmbiguousProbeError(RuntimeError):
    """The modulational probe family straddles the tube boundary."""

    def __init__(self, fraction_inside: float):
        self.fraction_inside = fraction_inside
        super().__init__(
            f"gamma selection is ambiguous: {fraction_inside:.0%} of probes fall inside "
            "the resonance tube"
        )


def d_tilde(k1, k3, params: IceParams):
    """Reduced resonance divisor; array-friendly, defined for all real inputs."""
    g, P, D = params.g, params.compression, params.bending
    k1 = np.asarray(k1, dtype=float)
    k3 = np.asarray(k3, dtype=float)
    quad = 3.0 * P - 5.0 * D * (k1**2 + k1 * k3 + k3**2)
    first = k1 * k3 * (k1 + k3) ** 2 * quad**2
    second = 4.0 * (g - P * k1**2 + D * k1**4) * (g - P * k3**2 + D * k3**4)
    out = first - second
    return float(out) if out.ndim == 0 else out


def full_mismatch(k1: float, k2: float, k3: float, params: IceParams) -> float:
    """Quadruple frequency product d123 over all sign choices of the triad.

    Vanishes exactly on resonant triads.  For k1 + k2 + k3 = 0 with
    sgn k1 = sgn k3 it factors as k1 * k3 * d_tilde(k1, k3).
    """
    w2 = [omega_sq(k, params) for k in (k1, k2, k3)]
    if any(w < 0 for w in w2):
        raise ValueError("evanescent mode in triad: omega^2 < 0")
    w1, w2_, w3 = (np.sqrt(w) for w in w2)
    return float((w1 + w2_ + w3) * (w1 + w2_ - w3) * (w1 - w2_ + w3) * (w1 - w2_ - w3))


@dataclass(frozen=True)
class ResonanceAtlas:
    """Sampled resonance curve plus the tube and relaxed-test parameters.

    ``curve`` holds the positive-quadrant branch as an (n, 2) array of
    (k1, k3) pairs, ordered by increasing k1 (k3 strictly decreasing).  The
    mirror branch through the third quadrant is implied by symmetry.  An
    empty curve is legal and means no resonance was found in the sampled
    window (e.g. vanishing bending), in which case every tube test is False.
    """

    params: IceParams
    curve: np.ndarray
    mu: float
    delta: float

    @property
    def empty(self) -> bool:
        return self.curve.size == 0

    def distance(self, k1: float, k3: float) -> float:
        """Euclidean distance from (k1, k3) to the sampled curve (both branches)."""
        if self.empty:
            return np.inf
        best = np.inf
        q = np.array([k1, k3], dtype=float)
        for pts in self._polylines():
            best = min(best, _point_polyline_distance(q, pts))
        return best

    def _polylines(self):
        c = self.curve
        yield c
        yield c[:, ::-1][::-1]      # swap-symmetric resampling of the same curve
        yield -c                     # mirror branch
        yield -c[:, ::-1][::-1]


def _point_polyline_distance(q: np.ndarray, pts: np.ndarray) -> float:
    if len(pts) == 1:
        return float(np.hypot(*(q - pts[0])))
    a = pts[:-1]
    b = pts[1:]
    seg = b - a
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    t = np.einsum("ij,ij->i", q - a, seg) / np.where(seg_len2 > 0, seg_len2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * seg
    d2 = np.einsum("ij,ij->i", q - proj, q - proj)
    return float(np.sqrt(d2.min()))


def _bracket_root(fun, seed: float, grow: float = 1.6, tries: int = 80):
    """Expand [lo, hi] geometrically around seed until fun changes sign."""
    lo, hi = seed / grow, seed * grow
    flo, fhi = fun(lo), fun(hi)
    for _ in range(tries):
        if np.sign(flo) != np.sign(fhi):
            return lo, hi
        lo /= grow
        hi *= grow
        flo, fhi = fun(lo), fun(hi)
    return None


def build_curve(params: IceParams, k1_lo: float = 1e-3, k1_hi: float = 10.0,
                n: int = DEFAULT_CURVE_POINTS, mu: float = 0.09,
                delta: float = DEFAULT_DELTA) -> ResonanceAtlas:
    """Trace the positive resonance branch over a log-spaced k1 grid.

    The first root is bracketed around the small-k1 asymptote
    k3 ~ (4g / (25 D k1))^(1/3); subsequent roots continue from the previous
    point.  Raises CurveConstructionError (carrying the offending k1) when a
    sign change cannot be bracketed.
    """
    if not (0 < k1_lo < k1_hi):
        raise ValueError(f"need 0 < k1_lo < k1_hi, got [{k1_lo}, {k1_hi}]")
    if n < 16:
        raise ValueError(f"need at least 16 sample points, got {n}")
    params.require_admissible()

    k1_grid = np.geomspace(k1_lo, k1_hi, n)
    pts = []
    prev = None
    for k1 in k1_grid:
        fun = lambda k3: d_tilde(k1, k3, params)
        seed = prev if prev is not None else (4.0 * params.g / (25.0 * params.bending * k1)) ** (1.0 / 3.0)
        bracket = _bracket_root(fun, seed)
        if bracket is None:
            if prev is None and not pts:
                # no resonance anywhere near the seed: report an empty atlas
                # only if the whole window is root-free, else fail loudly
                if _window_root_free(params, k1_grid):
                    return ResonanceAtlas(params=params,
                                          curve=np.empty((0, 2)), mu=mu, delta=delta)
            raise CurveConstructionError(float(k1))
        k3 = brentq(fun, *bracket, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        pts.append((float(k1), float(k3)))
        prev = k3
    return ResonanceAtlas(params=params, curve=np.asarray(pts), mu=float(mu), delta=float(delta))


def _window_root_free(params: IceParams, k1_grid: np.ndarray) -> bool:
    k3_scan = np.geomspace(1e-4, 1e4, 400)
    for k1 in k1_grid[:: max(1, len(k1_grid) // 16)]:
        vals = d_tilde(k1, k3_scan, params)
        if np.any(np.sign(vals[:-1]) != np.sign(vals[1:])):
            return False
    return True


def chi_geometric(k1: float, k2: float, k3: float, atlas: ResonanceAtlas) -> int:
    """Tube membership test: 1 iff the triad sums to zero and (k1, k3) lies
    within distance mu of the resonance curve."""
    scale = max(1.0, abs(k1), abs(k2), abs(k3))
    if abs(k1 + k2 + k3) > 1e-12 * scale:
        return 0
    return int(atlas.distance(k1, k3) <= atlas.mu)


def chi_relaxed(k1: float, k2: float, k3: float, delta: float, params: IceParams) -> int:
    """Discrete-resonance test used inside quadratures: 1 iff the triad sums
    to zero on the ladder and |w1 - w2 + w3| < delta."""
    scale = max(1.0, abs(k1), abs(k2), abs(k3))
    if abs(k1 + k2 + k3) > 1e-12 * scale:
        return 0
    mis = omega(abs(k1), params) - omega(abs(k2), params) + omega(abs(k3), params)
    return int(abs(mis) < delta)


def gamma_coefficient(k0: float, atlas: ResonanceAtlas, eps: float) -> int:
    """Mean-flow coefficient of the envelope model: 1 or 2.

    Probes the long-wave triad family (dk, -k0 - dk, k0) for dk = eps * s,
    s in (0, 1].  When the probes sit inside the resonance tube the nonlocal
    term keeps its one-sided form (gamma = 1); when they all fall outside,
    symmetrization doubles it (gamma = 2).  A straddling probe family has no
    principled answer and raises AmbiguousProbeError.
    """
    if k0 <= 0:
        raise ValueError(f"carrier must be positive, got {k0}")
    steps = np.linspace(0.1, 1.0, 10)
    hits = [chi_geometric(dk, -k0 - dk, k0, atlas) for dk in eps * steps]
    inside = sum(hits)
    if inside == len(hits):
        return 1
    if inside == 0:
        return 2
    raise AmbiguousProbeError(inside / len(hits))
