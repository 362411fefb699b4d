#!/usr/bin/env python3
"""Render publication figures from solver output files.

Reads only the documented output formats of the simulation toolkit (CSV
tables with header rows and "HWAV" binary surface snapshots) and never
recomputes physics.  Every figure kind is deterministic: fixed geometry,
fixed style, metadata stripped, so identical inputs give identical bytes.

Kinds:
    dispersion        phase/group speed curves        (dispersion CSV)
    omega2            squared dispersion relation     (dispersion CSVs, one per compression)
    resonance         resonance curve with tube       (triads CSV)
    bf-regions        sideband growth-rate curves     (bf-scan CSVs)
    bfi-curve         focusing index vs compression   (bfi-curve CSV)
    snapshot-overlay  envelope-model surfaces with full-solver extrema
                      (two HWAV snapshots + crests CSV)
    l2-error          model-vs-full relative errors   (series CSV)
    conservation      invariant drift curves          (series CSV)
"""

from __future__ import annotations

import argparse
import csv
import struct
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGSIZE = (6.4, 4.0)
DPI = 130

KINDS = ("dispersion", "omega2", "resonance", "bf-regions", "bfi-curve",
         "snapshot-overlay", "l2-error", "conservation")


class SchemaError(RuntimeError):
    """An input file is missing a required column."""


def read_table(path) -> dict[str, list[float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                try:
                    cols[name].append(float(value))
                except ValueError:
                    cols[name].append(float("nan"))
    return cols


def need(table: dict, path, *names):
    for name in names:
        if name not in table:
            raise SchemaError(f"{path}: missing column {name!r} "
                              f"(found {sorted(table)})")
    return [table[name] for name in names]


def read_surface_snapshot(path):
    """Parse the binary surface format: magic 'HWAV', version u32, N u64,
    L f64, t f64, then eta and xi as little-endian f64 blocks."""
    raw = Path(path).read_bytes()
    if raw[:4] != b"HWAV":
        raise SchemaError(f"{path}: not a surface snapshot")
    version, n, length, t = struct.unpack_from("<IQdd", raw, 4)
    if version != 1:
        raise SchemaError(f"{path}: unsupported version {version}")
    off = 4 + 28
    eta = struct.unpack_from(f"<{n}d", raw, off)
    xi = struct.unpack_from(f"<{n}d", raw, off + 8 * n)
    x = [length * i / n for i in range(n)]
    return x, list(eta), list(xi), length, t


def new_axes(xlabel, ylabel, title=""):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3, linewidth=0.5)
    return fig, ax


def save(fig, out):
    fig.tight_layout()
    fig.savefig(out, format="png", metadata={"Software": None})
    plt.close(fig)


def label_for(path) -> str:
    return Path(path).stem


def render_dispersion(inputs, out, args):
    fig, ax = new_axes("k", "speed")
    for path in inputs:
        t = read_table(path)
        k, c, cg = need(t, path, "k", "c", "cg")
        ax.plot(k, c, label=f"phase {label_for(path)}", linewidth=1.4)
        ax.plot(k, cg, "--", label=f"group {label_for(path)}", linewidth=1.4)
    ax.legend(fontsize=8)
    save(fig, out)


def render_omega2(inputs, out, args):
    fig, ax = new_axes("k", "omega^2")
    for path in inputs:
        t = read_table(path)
        k, w2 = need(t, path, "k", "omega_sq")
        ax.plot(k, w2, label=label_for(path), linewidth=1.4)
    ax.axhline(0.0, color="k", linewidth=0.8)
    ax.legend(fontsize=8)
    save(fig, out)


def render_resonance(inputs, out, args):
    path = inputs[0]
    t = read_table(path)
    k1, k3, lo1, lo3, hi1, hi3 = need(t, path, "k1", "k3", "tube_lo_k1",
                                      "tube_lo_k3", "tube_hi_k1", "tube_hi_k3")
    fig, ax = new_axes("k1", "k3")
    poly_x = list(lo1) + list(hi1)[::-1]
    poly_y = list(lo3) + list(hi3)[::-1]
    ax.fill(poly_x, poly_y, color="0.8", label="tube")
    ax.plot(k1, k3, "b-", linewidth=1.5, label="resonance curve")
    ax.set_xlim(0, max(k1) * 0.25)
    ax.set_ylim(0, max(k3) * 1.05)
    ax.legend(fontsize=8)
    save(fig, out)


def render_bf_regions(inputs, out, args):
    fig, ax = new_axes("sideband wavenumber", "normalized growth rate")
    for path in inputs:
        t = read_table(path)
        lam, growth = need(t, path, "lambda", "growth")
        ax.plot(lam, growth, label=label_for(path), linewidth=1.4)
    ax.legend(fontsize=8)
    save(fig, out)


def render_bfi_curve(inputs, out, args):
    path = inputs[0]
    t = read_table(path)
    p, b = need(t, path, "pcomp", "bfi")
    fig, ax = new_axes("compression", "focusing index")
    ax.plot(p, b, "b-", linewidth=1.5)
    ax.axhline(0.0, color="k", linewidth=0.8)
    crossings = [0.5 * (p[i] + p[i + 1]) for i in range(len(b) - 1)
                 if b[i] < 0 <= b[i + 1]]
    for x in crossings:
        ax.axvline(x, color="r", linestyle=":", linewidth=1.0)
        ax.annotate(f"sign change ~{x:.2f}", (x, 0), textcoords="offset points",
                    xytext=(6, 14), fontsize=8, color="r")
    ymax = max(abs(min(b)), abs(max(b)))
    ax.set_ylim(-min(1.0, ymax) if min(b) < 0 else -0.1, None)
    save(fig, out)


def render_snapshot_overlay(inputs, out, args):
    fig, ax = new_axes("x", "surface elevation")
    crest_files = [p for p in inputs if str(p).endswith(".csv")]
    snap_files = [p for p in inputs if not str(p).endswith(".csv")]
    t_snap = None
    for path in snap_files:
        x, eta, _, _, t_snap = read_surface_snapshot(path)
        ax.plot(x, eta, linewidth=1.0, label=label_for(path))
    for path in crest_files:
        t = read_table(path)
        tt, x, eta = need(t, path, "t", "x", "eta")
        pick = [i for i, v in enumerate(tt)
                if t_snap is None or abs(v - (args.time if args.time is not None else t_snap)) < 1e-9]
        ax.plot([x[i] for i in pick], [eta[i] for i in pick], "k.",
                markersize=3, label="full solver extrema")
    ax.legend(fontsize=8)
    save(fig, out)


def render_l2_error(inputs, out, args):
    fig, ax = new_axes("t", "relative L2 error")
    for path in inputs:
        t = read_table(path)
        tt, ed, en = need(t, path, "t", "err_dysthe", "err_nls")
        ax.semilogy(tt[1:], ed[1:], "b-", linewidth=1.4, label="higher-order model")
        ax.semilogy(tt[1:], en[1:], "r-", linewidth=1.4, label="cubic model")
    ax.legend(fontsize=8)
    save(fig, out)


def render_conservation(inputs, out, args):
    fig, ax = new_axes("t", "relative drift")
    for path in inputs:
        t = read_table(path)
        tt, dh, dm, dhe = need(t, path, "t", "dH_rel_dysthe", "dM_rel_dysthe",
                               "dH_rel_euler")
        ax.semilogy(tt[1:], dh[1:], "b-", linewidth=1.2, label="envelope H")
        ax.semilogy(tt[1:], dm[1:], "g-", linewidth=1.2, label="envelope M")
        ax.semilogy(tt[1:], dhe[1:], "r--", linewidth=1.2, label="full solver H")
    ax.legend(fontsize=8)
    save(fig, out)


RENDERERS = {
    "dispersion": render_dispersion,
    "omega2": render_omega2,
    "resonance": render_resonance,
    "bf-regions": render_bf_regions,
    "bfi-curve": render_bfi_curve,
    "snapshot-overlay": render_snapshot_overlay,
    "l2-error": render_l2_error,
    "conservation": render_conservation,
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--time", type=float, default=None,
                        help="snapshot time for crest filtering (overlay kind)")
    args = parser.parse_args(argv)
    for path in args.inputs:
        if not Path(path).exists():
            raise SystemExit(f"input not found: {path}")
    RENDERERS[args.kind](args.inputs, args.out, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
