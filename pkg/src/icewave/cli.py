"""Command-line front end.

Subcommands cover the analysis tables (dispersion curves, resonance curve
with its tube, sideband-instability scans, the focusing-index curve), the
three time steppers, envelope-to-surface reconstruction, and the full
model-comparison experiment.  All tabular output is CSV with a header row;
field states travel as binary snapshots.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dispersion import sample
from .envelope import DystheSolver, coefficients, diagnostics
from .euler import DnoConfig, EulerSolver, diagnostics_euler
from .harness import ExperimentConfig, run_comparison, stokes_ic
from .model import (
    IceParams,
    make_grid,
    parse_config,
    read_snapshot,
    write_envelope,
    write_surface,
)
from .normalform import FlowConfig, NormalFormTransform
from .resonance import build_curve
from .stability import bfi_curve, scan

_FMT = "{:.17g}"


def _write_table(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_FMT.format(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _params(args) -> IceParams:
    return IceParams(g=args.g, bending=args.bending, compression=args.pcomp)


def cmd_dispersion(args):
    params = _params(args)
    ks = np.linspace(0.0, args.kmax, args.samples)
    rows = []
    for k in ks:
        s = sample(float(k), params)
        rows.append([s.k, s.omega_sq,
                     s.omega if s.omega is not None else np.nan,
                     s.c if s.c is not None else np.nan,
                     s.cg if s.cg is not None else np.nan])
    _write_table(args.out, ["k", "omega_sq", "omega", "c", "cg"], rows)


def cmd_triads(args):
    params = _params(args)
    atlas = build_curve(params, args.k1_lo, args.k1_hi, n=args.samples, mu=args.mu)
    rows = []
    c = atlas.curve
    for i in range(len(c)):
        lo = max(i - 1, 0)
        hi = min(i + 1, len(c) - 1)
        tang = c[hi] - c[lo]
        nvec = np.array([-tang[1], tang[0]]) / np.hypot(*tang)
        tube_lo = c[i] - atlas.mu * nvec
        tube_hi = c[i] + atlas.mu * nvec
        rows.append([c[i, 0], c[i, 1], tube_lo[0], tube_lo[1], tube_hi[0], tube_hi[1]])
    _write_table(args.out, ["k1", "k3", "tube_lo_k1", "tube_lo_k3",
                            "tube_hi_k1", "tube_hi_k3"], rows)


def cmd_bf_scan(args):
    params = _params(args)
    eps = args.k0 * args.a0
    atlas = build_curve(params, mu=args.mu if args.mu is not None else eps)
    coeffs = coefficients(args.k0, params, atlas, eps=eps)
    if args.force_gamma is not None:
        coeffs = coeffs.with_gamma(args.force_gamma)
    lams = np.linspace(0.0, args.lam_max, args.samples)
    tab = scan(args.k0, args.a0, params, lams, coeffs)
    _write_table(args.out, ["lambda", "growth"], tab)


def cmd_bfi_curve(args):
    tab = bfi_curve(args.pmin, args.pmax, args.samples, g=args.g, bending=args.bending)
    _write_table(args.out, ["pcomp", "k_min", "bfi"], tab)


def cmd_run_envelope(args):
    cfg = ExperimentConfig(
        a0=args.a0, k0=args.k0, lam=args.lam, pcomp=args.pcomp, L=args.L, N=args.N,
        dt=args.dt, tmax=args.tmax, snap_every=args.snap_every,
        models=(args.model,), g=args.g, bending=args.bending)
    params = cfg.params
    grid = cfg.grid
    atlas = build_curve(params, mu=cfg.eps, delta=cfg.delta)
    coeffs = coefficients(args.k0, params, atlas, eps=cfg.eps)
    if args.force_gamma is not None:
        coeffs = coeffs.with_gamma(args.force_gamma)
    dcoeffs = coeffs if args.model == "dysthe" else coeffs.nls_truncation()
    solver = DystheSolver(grid, coeffs, args.dt, model=args.model)
    state = stokes_ic(cfg)
    out_dir = Path(args.out_dir) / cfg.run_id
    out_dir.mkdir(parents=True, exist_ok=True)
    steps = max(1, round(args.snap_every / args.dt))
    n_snaps = int(round(args.tmax / args.snap_every))
    rows = []

    def record(t):
        d = diagnostics(state, dcoeffs, grid=grid)
        rows.append([t, d.hamiltonian, d.action, d.momentum, np.abs(state.u).max()])
        write_envelope(out_dir / f"t{t:g}.henv", state, grid.length)

    record(0.0)
    for i in range(1, n_snaps + 1):
        state = solver.run(state, steps)
        record(i * args.snap_every)
    _write_table(out_dir / "series.csv", ["t", "H", "M", "I", "max_u"], rows)
    print(out_dir)


def cmd_run_euler(args):
    params = _params(args)
    kind, state, length = read_snapshot(args.ic)
    if kind == "envelope":
        grid = make_grid(length, state.count)
        nf = NormalFormTransform(grid, params, args.delta)
        state = nf.envelope_to_surface(state, FlowConfig(ds=args.ds, delta=args.delta))
    else:
        grid = make_grid(length, state.count)
    solver = EulerSolver(grid, params, args.dt, dno_order=args.dno_order,
                         dealias=args.dealias)
    cfg = DnoConfig(order=args.dno_order)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    steps = max(1, round(args.snap_every / args.dt))
    n_snaps = int(round(args.tmax / args.snap_every))
    rows = []

    def record(t):
        d = diagnostics_euler(state, params, cfg, grid)
        rows.append([t, d.hamiltonian, d.momentum, d.volume, np.abs(state.eta).max()])
        write_surface(out_dir / f"t{t:g}.hwav", state, grid.length)

    record(0.0)
    for i in range(1, n_snaps + 1):
        state = solver.run(state, steps)
        record(i * args.snap_every)
    _write_table(out_dir / "series.csv", ["t", "H", "I", "V", "max_eta"], rows)
    print(out_dir)


def cmd_reconstruct(args):
    params = _params(args)
    kind, state, length = read_snapshot(args.infile)
    if kind != "envelope":
        raise SystemExit("reconstruct expects an envelope snapshot")
    grid = make_grid(length, state.count)
    nf = NormalFormTransform(grid, params, args.delta)
    out = nf.envelope_to_surface(state, FlowConfig(ds=args.ds, delta=args.delta))
    write_surface(args.outfile, out, grid.length)


def cmd_compare(args):
    mapping = {}
    if args.config:
        mapping = parse_config(Path(args.config).read_text())
    overrides = {}
    if args.force_gamma is not None:
        overrides["force_gamma"] = args.force_gamma
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    cfg = ExperimentConfig.from_mapping(mapping, **overrides)
    report = run_comparison(cfg, progress=args.progress)
    if report.failed_at is not None:
        print(f"partial report, blow-up at t={report.failed_at}: {report.run_dir}")
    else:
        print(report.run_dir)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="icewave",
        description="Spectral toolkit for nonlinear waves under a compressed ice sheet")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p):
        p.add_argument("--pcomp", type=float, default=0.0, help="dimensionless compression")
        p.add_argument("--g", type=float, default=1.0)
        p.add_argument("--bending", type=float, default=1.0)

    p = sub.add_parser("dispersion", help="tabulate omega^2, omega, phase/group speeds")
    add_params(p)
    p.add_argument("--kmax", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=301)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("triads", help="resonance curve sample with tube polygon")
    add_params(p)
    p.add_argument("--mu", type=float, default=0.09)
    p.add_argument("--k1-lo", type=float, default=1e-3)
    p.add_argument("--k1-hi", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_triads)

    p = sub.add_parser("bf-scan", help="sideband growth-rate scan")
    add_params(p)
    p.add_argument("--a0", type=float, required=True)
    p.add_argument("--k0", type=float, required=True)
    p.add_argument("--lam-max", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--force-gamma", type=int, choices=(1, 2), default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bf_scan)

    p = sub.add_parser("bfi-curve", help="focusing index at the phase-speed minimum")
    p.add_argument("--pmin", type=float, default=0.0)
    p.add_argument("--pmax", type=float, default=1.9)
    p.add_argument("--samples", type=int, default=96)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--bending", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bfi_curve)

    p = sub.add_parser("run-envelope", help="advance an envelope model")
    add_params(p)
    p.add_argument("--model", choices=("dysthe", "nls"), default="dysthe")
    p.add_argument("--a0", type=float, required=True)
    p.add_argument("--k0", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--snap-every", type=float, required=True)
    p.add_argument("--force-gamma", type=int, choices=(1, 2), default=None)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_run_envelope)

    p = sub.add_parser("run-euler", help="advance the full solver from a snapshot")
    add_params(p)
    p.add_argument("--ic", required=True, help="envelope or surface snapshot")
    p.add_argument("--dno-order", type=int, default=6)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--snap-every", type=float, required=True)
    p.add_argument("--ds", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--dealias", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_run_euler)

    p = sub.add_parser("reconstruct", help="surface from an envelope snapshot")
    add_params(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--ds", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1e-6)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare", help="matched-data comparison experiment")
    p.add_argument("--config", default=None, help="flat key = value file")
    p.add_argument("--force-gamma", type=int, choices=(1, 2), default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_compare)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
