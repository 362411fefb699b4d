"""Experiment orchestration: matched-initial-data model comparisons.

A comparison run builds a perturbed uniform wavetrain envelope, synthesizes
the corresponding physical surface through the normal-form flow (so all
models start from the same wave content), then advances the cubic and
higher-order envelope models alongside the full solver.  At every snapshot
the envelope solutions are turned back into surfaces and scored against the
fully nonlinear one with relative L2 errors; conserved-quantity drifts and
the crest/trough loci of the full solution are recorded for plotting.

A second, independent route reconstructs surfaces perturbatively from a
second-order Stokes expansion driven by a reference cubic envelope equation
with closed-form coefficients (pure bending, no compression).  Comparing the
two routes cross-validates the non-perturbative reconstruction.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dispersion import CarrierDerivatives, carrier_derivatives, omega
from .envelope import (
    BlowUpError,
    DystheCoefficients,
    DystheSolver,
    coefficients,
    diagnostics,
)
from .euler import DnoConfig, EulerSolver, diagnostics_euler
from .model import (
    EnvelopeState,
    IceParams,
    InvalidParameterError,
    SpectralGrid,
    SurfaceState,
    config_run_id,
    make_grid,
    write_surface,
)
from .normalform import FlowConfig, NormalFormTransform
from .resonance import build_curve

__all__ = [
    "ExperimentConfig",
    "ComparisonReport",
    "StokesReference",
    "TrichtchenkoReport",
    "stokes_ic",
    "run_comparison",
    "trichtchenko_reference",
    "crest_extract",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one comparison experiment."""

    a0: float = 0.1
    k0: float = 0.9
    lam: float = 0.02
    pcomp: float = 1.0
    L: float = 200 * np.pi
    N: int = 1024
    dt: float = 0.01
    ds: float | None = None          # default: 10 * dt rounded to tile s
    delta: float = 1e-6
    tmax: float = 1e4
    snap_every: float = 250.0
    models: tuple = ("dysthe", "nls", "euler")
    dno_order: int = 6
    force_gamma: int | None = None
    euler_dealias: bool = False
    g: float = 1.0
    bending: float = 1.0
    out_dir: str | None = None

    def __post_init__(self):
        n_pert = self.lam * self.L / (2 * np.pi)
        if abs(n_pert - round(n_pert)) > 1e-9 or round(n_pert) < 1:
            raise InvalidParameterError(
                f"sideband {self.lam} does not fit the box: lam*L/2pi = {n_pert}")
        grid = self.grid
        grid.mode_index(self.k0)
        for m in self.models:
            if m not in ("dysthe", "nls", "euler"):
                raise InvalidParameterError(f"unknown model {m!r}")

    @property
    def params(self) -> IceParams:
        return IceParams(g=self.g, bending=self.bending, compression=self.pcomp)

    @property
    def grid(self) -> SpectralGrid:
        return make_grid(self.L, self.N)

    @property
    def eps(self) -> float:
        return self.k0 * self.a0

    @property
    def flow_ds(self) -> float:
        if self.ds is not None:
            return self.ds
        steps = max(1, round(1.0 / (10.0 * self.dt)))
        return 1.0 / steps

    def to_dict(self) -> dict:
        return {
            "a0": repr(self.a0), "k0": repr(self.k0), "lambda": repr(self.lam),
            "pcomp": repr(self.pcomp), "L": repr(self.L), "N": str(self.N),
            "dt": repr(self.dt), "ds": repr(self.flow_ds), "delta": repr(self.delta),
            "tmax": repr(self.tmax), "snap_every": repr(self.snap_every),
            "models": ",".join(self.models), "dno_order": str(self.dno_order),
            "force_gamma": str(self.force_gamma),
            "euler_dealias": str(int(self.euler_dealias)), "g": repr(self.g),
            "bending": repr(self.bending),
        }

    @property
    def run_id(self) -> str:
        return config_run_id(self.to_dict())

    @classmethod
    def from_mapping(cls, cfg: dict, **overrides) -> "ExperimentConfig":
        """Build from a flat str->str mapping (config file), plus overrides."""
        conv = {
            "a0": float, "k0": float, "lambda": float, "pcomp": float,
            "L": float, "N": int, "dt": float, "ds": float, "delta": float,
            "tmax": float, "snap_every": float, "dno_order": int,
            "force_gamma": int, "g": float, "bending": float, "out_dir": str,
            "euler_dealias": lambda s: s.strip().lower() in ("1", "true", "yes"),
        }
        kw = {}
        for key, raw in cfg.items():
            if key == "models":
                kw["models"] = tuple(m.strip() for m in raw.split(",") if m.strip())
            elif key == "lambda":
                kw["lam"] = float(raw)
            elif key in conv:
                kw[key] = None if raw.strip().lower() in ("none", "") else conv[key](raw)
            else:
                raise InvalidParameterError(f"unknown config key {key!r}")
        kw.update(overrides)
        return cls(**kw)


def stokes_ic(cfg: ExperimentConfig) -> EnvelopeState:
    """Perturbed uniform-train envelope u = B0 (1 + 0.1 cos(lam x)), with the
    amplitude fixed by the carrier's mode scaling B0 = A0 sqrt(w0/(2 k0))."""
    grid = cfg.grid
    w0 = omega(cfg.k0, cfg.params)
    b0 = cfg.a0 * np.sqrt(w0 / (2.0 * cfg.k0))
    u = b0 * (1.0 + 0.1 * np.cos(cfg.lam * grid.x))
    eps = cfg.eps if cfg.a0 > 0 else 0.5
    if cfg.a0 == 0:
        return EnvelopeState(np.zeros(grid.count, complex), cfg.k0, eps)
    return EnvelopeState(u.astype(complex), cfg.k0, eps)


@dataclass
class ComparisonReport:
    """Time series produced by a comparison run."""

    config: ExperimentConfig
    times: np.ndarray
    err: dict
    drift_h: dict
    drift_m: dict
    sideband: dict
    max_eta: np.ndarray
    failed_at: float | None = None
    run_dir: Path | None = None
    final_euler: SurfaceState | None = None

    def series_rows(self):
        cols = ["t", "err_dysthe", "err_nls", "dH_rel_dysthe", "dM_rel_dysthe",
                "dH_rel_euler"]
        yield cols
        for i, t in enumerate(self.times):
            yield [t,
                   self.err.get("dysthe", np.full_like(self.times, np.nan))[i],
                   self.err.get("nls", np.full_like(self.times, np.nan))[i],
                   self.drift_h.get("dysthe", np.full_like(self.times, np.nan))[i],
                   self.drift_m.get("dysthe", np.full_like(self.times, np.nan))[i],
                   self.drift_h.get("euler", np.full_like(self.times, np.nan))[i]]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _write_csv(path: Path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i, row in enumerate(rows):
            writer.writerow(row if i == 0 else [_fmt(v) for v in row])


def run_comparison(cfg: ExperimentConfig, write_outputs: bool = True,
                   progress: bool = False) -> ComparisonReport:
    """Advance the configured models from matched data and score them."""
    params = cfg.params
    params.require_admissible()
    grid = cfg.grid

    atlas = build_curve(params, mu=cfg.eps, delta=cfg.delta)
    coeffs = coefficients(cfg.k0, params, atlas, eps=cfg.eps)
    if cfg.force_gamma is not None:
        coeffs = coeffs.with_gamma(cfg.force_gamma)
    transform = NormalFormTransform(grid, params, cfg.delta)
    fcfg = FlowConfig(ds=cfg.flow_ds, direction="backward", delta=cfg.delta)

    u0 = stokes_ic(cfg)
    surf0 = transform.envelope_to_surface(u0, fcfg)

    env_models = [m for m in cfg.models if m in ("dysthe", "nls")]
    solvers = {m: DystheSolver(grid, coeffs, cfg.dt, model=m) for m in env_models}
    env_states = {m: u0.copy() for m in env_models}
    env_coeffs = {m: (coeffs if m == "dysthe" else coeffs.nls_truncation())
                  for m in env_models}
    run_euler = "euler" in cfg.models
    if run_euler:
        euler = EulerSolver(grid, params, cfg.dt, dno_order=cfg.dno_order,
                            dealias=cfg.euler_dealias)
        euler_state = surf0.copy()
        dno_cfg = DnoConfig(order=cfg.dno_order)
        h0_euler = diagnostics_euler(euler_state, params, dno_cfg, grid).hamiltonian

    d0 = {m: diagnostics(env_states[m], env_coeffs[m], grid=grid) for m in env_models}

    steps_per_snap = max(1, round(cfg.snap_every / cfg.dt))
    n_snaps = int(round(cfg.tmax / cfg.snap_every)) + 1
    # the envelope perturbation lives at the sideband offset itself
    sideband_index = grid.mode_index(cfg.lam) if cfg.a0 > 0 else 0

    run_dir = None
    if write_outputs:
        base = Path(cfg.out_dir) if cfg.out_dir else Path.cwd()
        run_dir = base / cfg.run_id
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "config.txt").write_text(
            "".join(f"{k} = {v}\n" for k, v in sorted(cfg.to_dict().items())))

    times = []
    err = {m: [] for m in env_models}
    drift_h = {m: [] for m in list(env_models) + (["euler"] if run_euler else [])}
    drift_m = {m: [] for m in env_models}
    sideband = {m: [] for m in env_models}
    max_eta = []
    crest_rows = [["t", "x", "eta", "kind"]]
    failed_at = None

    def record(t):
        times.append(t)
        recon = {m: transform.envelope_to_surface(env_states[m], fcfg)
                 for m in env_models}
        if run_euler:
            ref = euler_state
            max_eta.append(np.abs(ref.eta).max())
            dh = diagnostics_euler(ref, params, dno_cfg, grid).hamiltonian
            drift_h["euler"].append(abs(dh - h0_euler) / abs(h0_euler))
            crests, troughs = crest_extract(ref.eta, grid)
            for x, e in crests:
                crest_rows.append([t, x, e, "crest"])
            for x, e in troughs:
                crest_rows.append([t, x, e, "trough"])
        else:
            ref = None
            max_eta.append(max(np.abs(recon[m].eta).max() for m in env_models)
                           if env_models else 0.0)
        for m in env_models:
            if ref is not None:
                err[m].append(np.linalg.norm(recon[m].eta - ref.eta)
                              / np.linalg.norm(ref.eta))
            else:
                err[m].append(np.nan)
            d = diagnostics(env_states[m], env_coeffs[m], grid=grid)
            drift_h[m].append(abs(d.hamiltonian - d0[m].hamiltonian) / abs(d0[m].hamiltonian))
            drift_m[m].append(abs(d.action - d0[m].action) / abs(d0[m].action))
            u_hat = np.fft.fft(env_states[m].u) / grid.count
            sideband[m].append(abs(u_hat[sideband_index]))
        if write_outputs:
            stamp = f"{t:g}"
            if ref is not None:
                write_surface(run_dir / f"t{stamp}.euler.hwav", ref, grid.length)
            for m in env_models:
                write_surface(run_dir / f"t{stamp}.{m}.hwav", recon[m], grid.length)

    record(0.0)
    for snap in range(1, n_snaps):
        try:
            for m in env_models:
                env_states[m] = solvers[m].run(env_states[m], steps_per_snap)
            if run_euler:
                euler_state = euler.run(euler_state, steps_per_snap)
        except BlowUpError as exc:
            failed_at = exc.time
            log.warning("run %s blew up at t=%g", cfg.run_id, failed_at)
            break
        record(snap * cfg.snap_every)
        if progress:
            print(f"  t = {snap * cfg.snap_every:g} / {cfg.tmax:g}", flush=True)

    report = ComparisonReport(
        config=cfg,
        times=np.asarray(times),
        err={m: np.asarray(v) for m, v in err.items()},
        drift_h={m: np.asarray(v) for m, v in drift_h.items()},
        drift_m={m: np.asarray(v) for m, v in drift_m.items()},
        sideband={m: np.asarray(v) for m, v in sideband.items()},
        max_eta=np.asarray(max_eta),
        failed_at=failed_at,
        run_dir=run_dir,
        final_euler=euler_state.copy() if run_euler else None,
    )
    if write_outputs:
        _write_csv(run_dir / "series.csv", report.series_rows())
        _write_csv(run_dir / "crests.csv", iter(crest_rows))
    return report


# ---------------------------------------------------------------------------
# independent perturbative route (pure bending): reference envelope equation
# with closed-form coefficients and algebraic second-order reconstruction

@dataclass(frozen=True)
class StokesReference:
    """Reference cubic-envelope model with Stokes-expansion reconstruction."""

    k0: float
    params: IceParams
    w0: float
    w1: float
    w2: float
    cubic: float                      # coefficient of |eta1|^2 eta1

    @classmethod
    def build(cls, k0: float, params: IceParams) -> "StokesReference":
        if params.compression != 0:
            raise InvalidParameterError("reference expansion requires zero compression")
        g, D = params.g, params.bending
        if abs(g - 14 * D * k0**4) < 1e-12 * g:
            raise InvalidParameterError("resonant denominator: g = 14 D k0^4")
        w0 = np.sqrt(g * k0 + D * k0**5)
        w1 = (g + 5 * D * k0**4) / (2 * w0)
        w2 = -(g**2 - 30 * g * D * k0**4 - 15 * D**2 * k0**8) / (4 * w0**3)
        cubic = -(w0 * k0**2 * (4 * g**2 - 27 * g * D * k0**4 + 44 * D**2 * k0**8)
                  / (2 * (g + D * k0**4) * (g - 14 * D * k0**4)))
        return cls(k0=k0, params=params, w0=float(w0), w1=float(w1), w2=float(w2),
                   cubic=float(cubic))

    def second_harmonic(self, eta1: np.ndarray) -> np.ndarray:
        return self.w0**2 * eta1**2 / (self.params.g - 14 * self.params.bending * self.k0**4)

    def surface(self, eta1: np.ndarray, grid: SpectralGrid, t: float) -> SurfaceState:
        """Algebraic reconstruction eta = eta1 e^(i theta) + eta2 e^(2i theta) + c.c.
        with the potential integrated spectrally under the zero-mass gauge."""
        theta = np.exp(1j * (self.k0 * grid.x - self.w0 * t))
        eta2 = self.second_harmonic(eta1)
        eta = 2 * (eta1 * theta + eta2 * theta**2).real
        q = 2 * (self.w0 * eta1 * theta + 2 * self.w0 * eta2 * theta**2).real
        kap = grid.wavenumbers
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(kap != 0, 1.0 / (1j * kap), 0.0)
        inv[grid.nyquist_index] = 0.0
        xi = np.fft.ifft(inv * np.fft.fft(q)).real
        out = SurfaceState(eta, xi, t)
        out.apply_zero_mass()
        return out

    def solver(self, grid: SpectralGrid, dt: float) -> DystheSolver:
        # the reference envelope equation maps onto the cubic model with
        # coefficients (0, w1, w2, -cubic) in a frame without carrier rotation
        coeffs = DystheCoefficients(
            k0=self.k0, alpha=-self.cubic, beta=0.0, gamma=0,
            derivs=CarrierDerivatives(0.0, self.w1, self.w2, 0.0),
            c0l=0.0, c0r=0.0, c1l=0.0, c1r=0.0, c2l=0.0, c2r=0.0,
            params=self.params)
        return DystheSolver(grid, coeffs, dt, model="nls")


@dataclass
class TrichtchenkoReport:
    """Cross-validation of the two reconstruction routes at zero compression."""

    times: np.ndarray
    err_ours: np.ndarray
    err_reference: np.ndarray
    w2_ours: float
    w2_reference: float
    alpha_ours: float
    cubic_reference: float
    alpha_norm: float               # |c|^2 relating envelope and eta1 amplitudes


def trichtchenko_reference(cfg: ExperimentConfig, write_outputs: bool = False,
                           progress: bool = False) -> TrichtchenkoReport:
    """Run both reconstruction pipelines against their own full solutions.

    Ours: envelope from the cubic model, surfaces through the normal-form
    flow.  Reference: closed-form cubic envelope equation for the first
    harmonic with algebraic second-order reconstruction.  Each is scored
    against a full nonlinear run started from its own reconstructed data.
    """
    if cfg.pcomp != 0:
        raise InvalidParameterError("cross-validation runs at zero compression")
    params = cfg.params
    grid = cfg.grid
    ref = StokesReference.build(cfg.k0, params)

    atlas = build_curve(params, mu=cfg.eps, delta=cfg.delta)
    coeffs = coefficients(cfg.k0, params, atlas, eps=cfg.eps)
    d = carrier_derivatives(cfg.k0, params)
    # normalization between |u| and |eta1|: u = c eta1 exp(-i w0 t)
    c_norm = 2.0 * d.w0 / cfg.k0

    transform = NormalFormTransform(grid, params, cfg.delta)
    fcfg = FlowConfig(ds=cfg.flow_ds, direction="backward", delta=cfg.delta)

    u0 = stokes_ic(cfg)
    ours_env = u0.copy()
    ours_solver = DystheSolver(grid, coeffs, cfg.dt, model="nls")
    ours_euler = EulerSolver(grid, params, cfg.dt, dno_order=cfg.dno_order,
                             dealias=cfg.euler_dealias)
    ours_surf = transform.envelope_to_surface(u0, fcfg)

    eta1_0 = (cfg.a0 / 2.0) * (1.0 + 0.1 * np.cos(cfg.lam * grid.x))
    ref_env = EnvelopeState(eta1_0.astype(complex), cfg.k0,
                            cfg.eps if cfg.a0 > 0 else 0.5)
    ref_solver = ref.solver(grid, cfg.dt)
    ref_euler = EulerSolver(grid, params, cfg.dt, dno_order=cfg.dno_order,
                            dealias=cfg.euler_dealias)
    ref_surf = ref.surface(ref_env.u, grid, 0.0)

    steps_per_snap = max(1, round(cfg.snap_every / cfg.dt))
    n_snaps = int(round(cfg.tmax / cfg.snap_every)) + 1

    times, err_ours, err_ref = [0.0], [0.0], [0.0]
    for snap in range(1, n_snaps):
        ours_env = ours_solver.run(ours_env, steps_per_snap)
        ref_env = ref_solver.run(ref_env, steps_per_snap)
        ours_surf = ours_euler.run(ours_surf, steps_per_snap)
        ref_surf = ref_euler.run(ref_surf, steps_per_snap)
        t = snap * cfg.snap_every
        ours_recon = transform.envelope_to_surface(ours_env, fcfg)
        ref_recon = ref.surface(ref_env.u, grid, t)
        times.append(t)
        err_ours.append(np.linalg.norm(ours_recon.eta - ours_surf.eta)
                        / np.linalg.norm(ours_surf.eta))
        err_ref.append(np.linalg.norm(ref_recon.eta - ref_surf.eta)
                       / np.linalg.norm(ref_surf.eta))
        if progress:
            print(f"  t = {t:g} / {cfg.tmax:g}", flush=True)

    return TrichtchenkoReport(
        times=np.asarray(times),
        err_ours=np.asarray(err_ours),
        err_reference=np.asarray(err_ref),
        w2_ours=d.w2,
        w2_reference=ref.w2,
        alpha_ours=coeffs.alpha,
        cubic_reference=ref.cubic,
        alpha_norm=c_norm,
    )


def crest_extract(eta: np.ndarray, grid: SpectralGrid):
    """Local maxima and minima located from spectral-derivative sign changes,
    refined by a local quadratic fit.  Returns (crests, troughs) as lists of
    (x, eta) pairs."""
    n = eta.size
    if np.abs(eta).max() == 0.0:
        return [], []
    kap = grid.wavenumbers.copy()
    kap[grid.nyquist_index] = 0.0
    deriv = np.fft.ifft(1j * kap * np.fft.fft(eta)).real
    nxt = np.roll(deriv, -1)
    crests, troughs = [], []
    for i in np.flatnonzero((deriv > 0) & (nxt <= 0)):
        crests.append(_refine(eta, deriv, grid, int(i)))
    for i in np.flatnonzero((deriv < 0) & (nxt >= 0)):
        troughs.append(_refine(eta, deriv, grid, int(i)))
    return crests, troughs


def _refine(eta, deriv, grid, i):
    n = eta.size
    d0, d1 = deriv[i], deriv[(i + 1) % n]
    t = d0 / (d0 - d1) if d0 != d1 else 0.0
    x = (i + t) * grid.dx
    # quadratic through the three nodes around the crossing
    y0, y1, y2 = eta[(i - 1) % n], eta[i], eta[(i + 1) % n]
    a = 0.5 * (y0 - 2 * y1 + y2)
    b = 0.5 * (y2 - y0)
    val = y1 + b * t + a * t * t
    return float(x % grid.length), float(val)
