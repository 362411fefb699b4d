import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent
SAMPLES = ROOT / "samples"
HASHES = ROOT / "hashes.json"

CASES = {
    "dispersion": ["dispersion_p1.csv"],
    "omega2": ["dispersion_p0.csv", "dispersion_p1.csv", "dispersion_p19.csv"],
    "resonance": ["triads_p1.csv"],
    "bf-regions": ["bfscan_p0.csv", "bfscan_p1.csv", "bfscan_p19.csv"],
    "bfi-curve": ["bfi.csv"],
    "snapshot-overlay": ["t2.dysthe.hwav", "t2.nls.hwav", "crests.csv"],
    "l2-error": ["series.csv"],
    "conservation": ["series.csv"],
}


def render(kind, out, extra=()):
    inputs = [str(SAMPLES / name) for name in CASES[kind]]
    cmd = [sys.executable, str(ROOT / "render.py"), "--kind", kind,
           "--in", *inputs, "--out", str(out), *extra]
    subprocess.run(cmd, check=True, capture_output=True)
    return Path(out).read_bytes()


@pytest.mark.parametrize("kind", sorted(CASES))
def test_kind_renders_deterministically(kind, tmp_path):
    extra = ["--time", "2"] if kind == "snapshot-overlay" else []
    first = render(kind, tmp_path / "a.png", extra)
    second = render(kind, tmp_path / "b.png", extra)
    assert first[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(first) > 5000
    assert first == second


@pytest.mark.parametrize("kind", sorted(CASES))
def test_regression_hashes(kind, tmp_path):
    if not HASHES.exists():
        pytest.skip("no committed hashes")
    committed = json.loads(HASHES.read_text())
    extra = ["--time", "2"] if kind == "snapshot-overlay" else []
    data = render(kind, tmp_path / "x.png", extra)
    assert hashlib.sha256(data).hexdigest() == committed[kind], (
        f"rendered bytes for {kind} changed; regenerate hashes.json if intended")


def test_bfi_figure_shows_sign_change(tmp_path):
    # the committed focusing-index table must cross zero near 0.39, and the
    # rendered figure annotates that crossing
    rows = (SAMPLES / "bfi.csv").read_text().strip().splitlines()[1:]
    table = [tuple(map(float, r.split(","))) for r in rows]
    crossings = [0.5 * (a[0] + b[0]) for a, b in zip(table, table[1:])
                 if a[2] < 0 <= b[2]]
    assert len(crossings) == 1
    assert abs(crossings[0] - 0.39) < 0.03
    render("bfi-curve", tmp_path / "bfi.png")


def test_missing_column_is_descriptive(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    cmd = [sys.executable, str(ROOT / "render.py"), "--kind", "l2-error",
           "--in", str(bad), "--out", str(tmp_path / "o.png")]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode != 0
    assert "err_dysthe" in proc.stderr


def test_empty_series_still_renders(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,err_dysthe,err_nls,dH_rel_dysthe,dM_rel_dysthe,dH_rel_euler\n")
    cmd = [sys.executable, str(ROOT / "render.py"), "--kind", "l2-error",
           "--in", str(empty), "--out", str(tmp_path / "o.png")]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "o.png").exists()


def test_unknown_columns_ignored(tmp_path):
    src = (SAMPLES / "bfi.csv").read_text().splitlines()
    extra = tmp_path / "extra.csv"
    extra.write_text("\n".join([src[0] + ",bonus"] +
                               [line + ",1.0" for line in src[1:]]) + "\n")
    cmd = [sys.executable, str(ROOT / "render.py"), "--kind", "bfi-curve",
           "--in", str(extra), "--out", str(tmp_path / "o.png")]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0
