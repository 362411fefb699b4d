"""Core data types: physical parameters, spectral grids, and field states.

Everything downstream works in dimensionless units where gravity and the
flexural rigidity of the ice sheet are both 1.  The only free physical
parameter left after rescaling is the dimensionless compression, which must
stay below 2 for the linearized problem to support travelling waves at every
wavenumber.
"""

from __future__ import annotations

import hashlib
import struct
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "IceParams",
    "SpectralGrid",
    "SurfaceState",
    "EnvelopeState",
    "Diagnostics",
    "InvalidParameterError",
    "InadmissibleParamsError",
    "nondimensionalize",
    "make_grid",
    "parse_config",
    "config_run_id",
    "write_surface",
    "read_surface",
    "write_envelope",
    "read_envelope",
    "read_snapshot",
]

SURFACE_MAGIC = b"HWAV"
ENVELOPE_MAGIC = b"HENV"
FORMAT_VERSION = 1


class InvalidParameterError(ValueError):
    """Raised when a constructor argument is out of its admissible range."""


class InadmissibleParamsError(RuntimeError):
    """Raised when time stepping is requested with compression >= 2."""


@dataclass(frozen=True)
class IceParams:
    """Dimensionless constants of the ice/water system.

    Attributes
    ----------
    g:
        Gravitational acceleration (1 after rescaling).
    bending:
        Flexural rigidity coefficient (1 after rescaling).
    compression:
        Dimensionless in-plane compression of the ice sheet.  Values in
        [0, 2) keep the squared dispersion relation positive for all
        nonzero wavenumbers; larger values admit exponentially growing
        linear modes and are flagged at construction.
    """

    g: float = 1.0
    bending: float = 1.0
    compression: float = 0.0

    def __post_init__(self):
        if not (self.g > 0 and self.bending > 0):
            raise InvalidParameterError(
                f"g and bending must be positive, got g={self.g}, bending={self.bending}"
            )
        if self.compression < 0:
            raise InvalidParameterError(f"compression must be >= 0, got {self.compression}")
        if not self.admissible:
            warnings.warn(
                f"compression={self.compression} >= 2: evanescent/growing linear modes "
                "exist; analysis operations remain valid but time stepping will refuse "
                "these parameters",
                stacklevel=2,
            )

    @property
    def admissible(self) -> bool:
        """True when all nonzero wavenumbers carry travelling waves."""
        # omega^2 = |k|(g - P k^2 + D k^4) > 0 for k != 0 iff P < 2 sqrt(g D)
        return self.compression < 2.0 * np.sqrt(self.g * self.bending)

    def require_admissible(self):
        if not self.admissible:
            raise InadmissibleParamsError(
                f"time stepping refused: compression={self.compression} admits "
                "evanescent linear modes (need compression < 2 in rescaled units)"
            )


def nondimensionalize(E: float, h: float, nu: float, rho: float,
                      g_phys: float, P_phys: float = 0.0):
    """Convert physical ice-sheet data to dimensionless parameters.

    Parameters
    ----------
    E:
        Young's modulus of the ice [Pa].
    h:
        Ice thickness [m].
    nu:
        Poisson ratio, in (0, 1).
    rho:
        Water density [kg/m^3].
    g_phys:
        Gravitational acceleration [m/s^2].
    P_phys:
        Compressive stress [Pa].

    Returns
    -------
    (IceParams, length_scale, time_scale):
        Dimensionless parameters plus the length [m] and time [s] scales to
        convert model output back to physical units.
    """
    if min(E, h, rho, g_phys) <= 0:
        raise InvalidParameterError("E, h, rho and g must all be positive")
    if not 0 < nu < 1:
        raise InvalidParameterError(f"Poisson ratio must lie in (0,1), got {nu}")
    if P_phys < 0:
        raise InvalidParameterError(f"compressive stress must be >= 0, got {P_phys}")
    sigma = E * h**3 / (12.0 * (1.0 - nu**2))
    compression = P_phys * h / np.sqrt(sigma * rho * g_phys)
    length_scale = (sigma / (rho * g_phys)) ** 0.25
    time_scale = (sigma / (rho * g_phys**5)) ** 0.125
    return IceParams(g=1.0, bending=1.0, compression=float(compression)), float(length_scale), float(time_scale)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic collocation grid and its discrete wavenumber ladder."""

    length: float
    count: int

    def __post_init__(self):
        if self.length <= 0:
            raise InvalidParameterError(f"domain length must be positive, got {self.length}")
        if self.count < 4 or self.count % 2 != 0:
            raise InvalidParameterError(f"need an even number of points >= 4, got {self.count}")

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def dx(self) -> float:
        return self.length / self.count

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.count) * self.dx

    @property
    def modes(self) -> np.ndarray:
        """Integer mode numbers p in [-N/2, N/2-1], FFT storage order."""
        return np.fft.fftfreq(self.count, d=1.0 / self.count).astype(np.int64)

    @property
    def wavenumbers(self) -> np.ndarray:
        """kappa_p = p * dk, FFT storage order."""
        return self.modes * self.dk

    @property
    def nyquist_index(self) -> int:
        return self.count // 2

    def mode_index(self, k: float) -> int:
        """Ladder index of a wavenumber that must sit exactly on the grid."""
        p = k / self.dk
        p_int = int(round(p))
        if abs(p - p_int) > 1e-9 or not (-self.count // 2 <= p_int < self.count // 2):
            raise InvalidParameterError(f"wavenumber {k} is not on the discrete ladder")
        return p_int % self.count


def make_grid(L: float, N: int) -> SpectralGrid:
    """Build the periodic grid with spacing dx = L/N and dk = 2*pi/L."""
    return SpectralGrid(length=float(L), count=int(N))


@dataclass
class SurfaceState:
    """Surface elevation and velocity-potential trace at the collocation points.

    Both fields are real.  The mean of ``eta`` is pinned to zero (the additive
    constant of the elevation is not dynamical and removing it lifts the k=0
    indeterminacy of downstream mode transformations).
    """

    eta: np.ndarray
    xi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.xi = np.asarray(self.xi, dtype=float)
        if self.eta.shape != self.xi.shape or self.eta.ndim != 1:
            raise InvalidParameterError("eta and xi must be 1-D arrays of equal length")

    @property
    def count(self) -> int:
        return self.eta.size

    def eta_hat(self) -> np.ndarray:
        """Fourier coefficients, normalized so eta(x_j) = sum_p c_p exp(i kappa_p x_j)."""
        return np.fft.fft(self.eta) / self.count

    def xi_hat(self) -> np.ndarray:
        return np.fft.fft(self.xi) / self.count

    def apply_zero_mass(self):
        """Remove the spatial mean of the elevation in place."""
        self.eta = self.eta - self.eta.mean()

    def copy(self) -> "SurfaceState":
        return SurfaceState(self.eta.copy(), self.xi.copy(), self.time)


@dataclass
class EnvelopeState:
    """Complex wave envelope riding on a carrier.

    The stored field absorbs the steepness factor: the physical complex mode
    field is ``u(x) * exp(i k0 x)`` directly, so a uniform train of surface
    amplitude A0 corresponds to ``|u| = A0 sqrt(omega0 / (2 k0))``.  The
    nominal steepness ``k0*A0`` is kept for reporting and configuration.
    """

    u: np.ndarray
    carrier: float
    steepness: float
    time: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        if self.u.ndim != 1:
            raise InvalidParameterError("u must be a 1-D complex array")
        if self.carrier <= 0:
            raise InvalidParameterError(f"carrier wavenumber must be positive, got {self.carrier}")
        if not 0 < self.steepness < 1:
            raise InvalidParameterError(f"steepness must lie in (0,1), got {self.steepness}")

    @property
    def count(self) -> int:
        return self.u.size

    @property
    def slow_time(self) -> float:
        """Long time scale tau = steepness^2 * t."""
        return self.steepness**2 * self.time

    def copy(self) -> "EnvelopeState":
        return EnvelopeState(self.u.copy(), self.carrier, self.steepness, self.time)


@dataclass(frozen=True)
class Diagnostics:
    """Conserved-quantity snapshot: energy, action, momentum, volume."""

    hamiltonian: float
    action: float
    momentum: float
    volume: float = 0.0


# ---------------------------------------------------------------------------
# configuration files: flat "key = value" lines, '#' comments

def parse_config(text: str) -> dict:
    """Parse a flat key/value config into a str->str dict.

    One ``key = value`` pair per line; blank lines and '#' comments are
    ignored; inline comments after the value are stripped.
    """
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_run_id(cfg: dict) -> str:
    """Deterministic short identifier derived from the configuration content."""
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# binary snapshots
#
# Surface: magic "HWAV", format version u32, N u64, L f64, t f64,
#          then eta (N little-endian f64) then xi (N little-endian f64).
# Envelope: magic "HENV", same header plus carrier f64 and steepness f64,
#           then Re(u) and Im(u) as N-long f64 blocks.

def write_surface(path, state: SurfaceState, length: float):
    with open(path, "wb") as fh:
        fh.write(SURFACE_MAGIC)
        fh.write(struct.pack("<IQdd", FORMAT_VERSION, state.count, float(length), float(state.time)))
        fh.write(state.eta.astype("<f8").tobytes())
        fh.write(state.xi.astype("<f8").tobytes())


def read_surface(path) -> tuple[SurfaceState, float]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SURFACE_MAGIC:
            raise InvalidParameterError(f"not a surface snapshot: bad magic {magic!r}")
        version, n, length, t = struct.unpack("<IQdd", fh.read(28))
        if version != FORMAT_VERSION:
            raise InvalidParameterError(f"unsupported snapshot version {version}")
        eta = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
        xi = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
    return SurfaceState(eta, xi, t), length


def write_envelope(path, state: EnvelopeState, length: float):
    with open(path, "wb") as fh:
        fh.write(ENVELOPE_MAGIC)
        fh.write(struct.pack("<IQdddd", FORMAT_VERSION, state.count, float(length),
                             float(state.time), float(state.carrier), float(state.steepness)))
        fh.write(state.u.real.astype("<f8").tobytes())
        fh.write(state.u.imag.astype("<f8").tobytes())


def read_envelope(path) -> tuple[EnvelopeState, float]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != ENVELOPE_MAGIC:
            raise InvalidParameterError(f"not an envelope snapshot: bad magic {magic!r}")
        version, n, length, t, carrier, eps = struct.unpack("<IQdddd", fh.read(44))
        if version != FORMAT_VERSION:
            raise InvalidParameterError(f"unsupported snapshot version {version}")
        re = np.frombuffer(fh.read(8 * n), dtype="<f8")
        im = np.frombuffer(fh.read(8 * n), dtype="<f8")
    return EnvelopeState(re + 1j * im, carrier, eps, t), length


def read_snapshot(path):
    """Read either snapshot flavour, dispatching on the magic bytes.

    Returns ``("surface", SurfaceState, L)`` or ``("envelope", EnvelopeState, L)``.
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == SURFACE_MAGIC:
        state, length = read_surface(path)
        return "surface", state, length
    if magic == ENVELOPE_MAGIC:
        state, length = read_envelope(path)
        return "envelope", state, length
    raise InvalidParameterError(f"unrecognized snapshot magic {magic!r}")
