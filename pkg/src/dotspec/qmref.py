"""Exact quantum reference: wavepacket propagation on a Cartesian grid.

The magnetic term omegaL * L_z generates a rigid rotation that commutes
with the rest of the Hamiltonian (trap and Coulomb terms are central), so
the propagation is carried out in the frame co-rotating at the Larmor
frequency, where the generator

    H' = p^2 / (2 mu) + (mu Omega^2 / 2) r^2 + kappa / r

has no first-derivative terms.  H' is integrated with a Strang-split
kinetic/potential step using FFTs: unconditionally stable, spectrally
accurate in space, and exactly norm conserving.  The lab-frame
autocorrelation is recovered analytically,

    c(t) = < U(-omegaL t) psi0 | psi'(t) >,

because rotating the initial Gaussian merely rotates its center and
momentum.  Rotation-invariant observables (norm, energy, radial density)
are identical in the two frames; the array returned by evolve is the
co-rotating-frame amplitude (equal to the lab frame when omegaL = 0).

A five-point/centered-difference discretization of the full lab-frame
Hamiltonian (including L_z) is kept in apply_hamiltonian for diagnostics
and cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .hk import CorrelationSeries, GaussianState
from .model import DotParameters
from .spectral import SpectrumResult, find_peaks, label_peaks, spectrum
from .wkb import wkb_table

__all__ = [
    "BoundaryLeakError",
    "DomainTooSmallError",
    "GridSpec",
    "GridWavefunction",
    "NormDriftError",
    "apply_hamiltonian",
    "energy_expectation",
    "evolve",
    "init_packet",
    "quantum_autocorrelation",
    "quantum_spectrum",
]

_LEAK_DENSITY = 1e-10
_NORM_TOL = 1e-6


class DomainTooSmallError(ValueError):
    """Initial packet has non-negligible weight at the grid boundary."""


class BoundaryLeakError(RuntimeError):
    """Probability density reached the grid boundary during propagation."""


class NormDriftError(RuntimeError):
    """Wavefunction norm drifted beyond tolerance during propagation."""


@dataclass(frozen=True)
class GridSpec:
    """Square grid [-extent, extent]^2 with n points per axis and time step dt.

    The packet's overlap with the Coulomb core carries components of energy
    up to the regularized core height, which radiate out to their classical
    turning radius before tunneling off; the default box is sized so that
    this halo stays below the boundary-density threshold.
    """

    extent: float = 18.0
    n: int = 288
    dt: float = 2e-3

    def __post_init__(self):
        if self.n < 64:
            raise ValueError("n must be >= 64")
        if self.extent <= 0 or self.dt <= 0:
            raise ValueError("extent and dt must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.n - 1)

    def axes(self):
        x = np.linspace(-self.extent, self.extent, self.n)
        return np.meshgrid(x, x, indexing="ij")


@dataclass
class GridWavefunction:
    """Complex amplitudes psi[ix, iy] with the generating packet, if any."""

    psi: np.ndarray
    grid: GridSpec
    source: GaussianState | None = None

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape != (self.grid.n, self.grid.n):
            raise ValueError("psi shape must match the grid")

    def norm(self) -> float:
        h = self.grid.spacing
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * h * h))


def _gaussian_on_grid(state: GaussianState, grid: GridSpec, hbar: float,
                      rotation: float = 0.0) -> np.ndarray:
    """Sample the packet, optionally with center and momentum rotated by
    `rotation` (counterclockwise, radians)."""
    xg, yg = grid.axes()
    qc, pc = state.q_center, state.p_center
    if rotation != 0.0:
        c, s = np.cos(rotation), np.sin(rotation)
        qc = np.array([c * qc[0] - s * qc[1], s * qc[0] + c * qc[1]])
        pc = np.array([c * pc[0] - s * pc[1], s * pc[0] + c * pc[1]])
    dx = xg - qc[0]
    dy = yg - qc[1]
    g1, g2 = state.gamma
    norm = (g1 * g2 / np.pi**2) ** 0.25
    return norm * np.exp(
        -0.5 * (g1 * dx * dx + g2 * dy * dy)
        + (1j / hbar) * (pc[0] * dx + pc[1] * dy)
    )


def _boundary_density(psi: np.ndarray) -> float:
    frame = np.concatenate([
        np.abs(psi[:2, :]).ravel(),
        np.abs(psi[-2:, :]).ravel(),
        np.abs(psi[:, :2]).ravel(),
        np.abs(psi[:, -2:]).ravel(),
    ])
    return float(np.max(frame) ** 2)


def init_packet(alpha_state: GaussianState, grid: GridSpec,
                hbar: float = 1.0) -> GridWavefunction:
    """Sample the packet on the grid and normalize the Riemann sum to 1."""
    psi = _gaussian_on_grid(alpha_state, grid, hbar)
    h = grid.spacing
    nrm = np.sqrt(np.sum(np.abs(psi) ** 2) * h * h)
    psi /= nrm
    if _boundary_density(psi) >= _LEAK_DENSITY:
        raise DomainTooSmallError(
            f"packet density at the boundary exceeds {_LEAK_DENSITY:g}; "
            "increase extent"
        )
    return GridWavefunction(psi=psi, grid=grid, source=alpha_state)


_CORE_CELLS = 6      # cells within this radius (in units of h) get averaged
_CORE_SUBSAMPLES = 128


def _potential(params: DotParameters, grid: GridSpec) -> np.ndarray:
    """Trap plus Coulomb on the grid.

    Pointwise sampling of 1/r under-integrates the cusp and biases levels
    with weight at the origin by O(h), so cells near the origin carry the
    exact cell average of kappa/r instead (midpoint subsampling; the
    integrable singularity sits at a cell corner or center and is never
    hit).  Far from the core the cell average equals the pointwise value
    to O(h^2/r^2) and plain sampling is kept.
    """
    xg, yg = grid.axes()
    r2 = xg * xg + yg * yg
    h = grid.spacing
    v = 0.5 * params.mu * params.Omega**2 * r2
    if params.kappa > 0:
        r = np.sqrt(r2)
        coul = params.kappa / np.maximum(r, 1e-300)
        near = r < _CORE_CELLS * h
        sub = (np.arange(_CORE_SUBSAMPLES) + 0.5) / _CORE_SUBSAMPLES - 0.5
        dx, dy = np.meshgrid(sub * h, sub * h, indexing="ij")
        for ix, iy in zip(*np.nonzero(near)):
            cx = xg[ix, iy] + dx
            cy = yg[ix, iy] + dy
            coul[ix, iy] = params.kappa * np.mean(1.0 / np.hypot(cx, cy))
        v = v + coul
    return v


def _kinetic_phase(params: DotParameters, grid: GridSpec) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.spacing)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    t = params.hbar * (kx * kx + ky * ky) / (2.0 * params.mu)
    return np.exp(-1j * grid.dt * t)


def evolve(psi: GridWavefunction, params: DotParameters, grid: GridSpec,
           n_steps: int, observer=None, record_stride: int = 1,
           workers: int | None = None) -> GridWavefunction:
    """Advance n_steps split steps; report lab-frame c(t) at record times.

    The observer is called as observer(t, c) at t = 0 and then every
    record_stride steps, with c the overlap of the evolving state against
    the (analytically rotated) initial packet.  Norm and boundary leakage
    are checked at every record time.

    For omegaL != 0 the rotated reference requires the wavefunction to
    carry its generating Gaussian (set by init_packet).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if grid != psi.grid:
        raise ValueError("wavefunction was built on a different grid")
    if params.omegaL != 0.0 and observer is not None and psi.source is None:
        raise ValueError(
            "omegaL != 0 requires a wavefunction created by init_packet "
            "(the rotating-frame overlap needs the generating Gaussian)"
        )
    hbar = params.hbar
    h = grid.spacing
    half_v = np.exp(-0.5j * grid.dt * _potential(params, grid) / hbar)
    kin = _kinetic_phase(params, grid)
    work = psi.psi.copy()
    ref0 = work.copy()

    def report(step_index):
        t = step_index * grid.dt
        nrm2 = np.sum(np.abs(work) ** 2) * h * h
        if abs(np.sqrt(nrm2) - 1.0) > _NORM_TOL:
            raise NormDriftError(f"norm drifted to {np.sqrt(nrm2)!r} at t={t!r}")
        if _boundary_density(work) >= _LEAK_DENSITY:
            raise BoundaryLeakError(f"boundary density exceeded at t={t!r}")
        if observer is not None:
            if params.omegaL == 0.0:
                ref = ref0
            else:
                ref = _gaussian_on_grid(psi.source, grid, hbar,
                                        rotation=-params.omegaL * t)
                ref = ref / np.sqrt(np.sum(np.abs(ref) ** 2) * h * h)
            observer(t, complex(np.vdot(ref, work) * h * h))

    report(0)
    for s in range(1, n_steps + 1):
        work *= half_v
        work = scipy.fft.ifft2(kin * scipy.fft.fft2(work, workers=workers),
                               workers=workers)
        work *= half_v
        if s % record_stride == 0 or s == n_steps:
            report(s)
    return GridWavefunction(psi=work, grid=grid, source=psi.source)


def quantum_autocorrelation(alpha_state: GaussianState, params: DotParameters,
                            grid: GridSpec, n_steps: int, record_stride: int = 5,
                            workers: int | None = None) -> CorrelationSeries:
    """c(t) from grid propagation, on the same CSV-ready series type as the
    semiclassical route."""
    if n_steps % record_stride != 0:
        raise ValueError("n_steps must be a multiple of record_stride")
    psi0 = init_packet(alpha_state, grid, params.hbar)
    times, values = [], []

    def observer(t, c):
        times.append(t)
        values.append(c)

    evolve(psi0, params, grid, n_steps, observer=observer,
           record_stride=record_stride, workers=workers)
    return CorrelationSeries(times=np.array(times), values=np.array(values),
                             n_used=1, n_discarded=0, seed=0)


def quantum_spectrum(alpha_state: GaussianState, params: DotParameters,
                     grid: GridSpec, T: float, window: str = "hann",
                     record_stride: int = 5, threshold: float = 0.05,
                     label_table=None, workers: int | None = None) -> SpectrumResult:
    """Propagate to time T and return the spectrum with labelled peaks."""
    sample_dt = grid.dt * record_stride
    n_records = max(2, round(T / sample_dt))
    series = quantum_autocorrelation(alpha_state, params, grid,
                                     n_records * record_stride,
                                     record_stride, workers=workers)
    spec = spectrum(series, window=window, hbar=params.hbar)
    peaks = find_peaks(spec, threshold=threshold)
    if label_table is None:
        label_table = wkb_table(params, range(0, 3), range(-2, 5))
    spec.peaks = label_peaks(peaks, label_table)
    return spec


def apply_hamiltonian(psi: np.ndarray, params: DotParameters,
                      grid: GridSpec) -> np.ndarray:
    """Lab-frame Hamiltonian on a grid function, finite differences.

    Five-point Laplacian and centered first differences for L_z, with
    zero-padded edges; the discretization is Hermitian to roundoff.
    Used for diagnostics, not for time stepping.
    """
    h = grid.spacing
    xg, yg = grid.axes()
    out = _potential(params, grid) * psi

    lap = -4.0 * psi.astype(complex)
    lap[1:, :] += psi[:-1, :]
    lap[:-1, :] += psi[1:, :]
    lap[:, 1:] += psi[:, :-1]
    lap[:, :-1] += psi[:, 1:]
    out += -(params.hbar**2) / (2.0 * params.mu) * lap / (h * h)

    if params.omegaL != 0.0:
        dx = np.zeros_like(psi, dtype=complex)
        dx[1:-1, :] = (psi[2:, :] - psi[:-2, :]) / (2.0 * h)
        dx[0, :] = psi[1, :] / (2.0 * h)
        dx[-1, :] = -psi[-2, :] / (2.0 * h)
        dy = np.zeros_like(psi, dtype=complex)
        dy[:, 1:-1] = (psi[:, 2:] - psi[:, :-2]) / (2.0 * h)
        dy[:, 0] = psi[:, 1] / (2.0 * h)
        dy[:, -1] = -psi[:, -2] / (2.0 * h)
        lz = -1j * params.hbar * (xg * dy - yg * dx)
        out += params.omegaL * lz
    return out


def energy_expectation(wf: GridWavefunction, params: DotParameters) -> float:
    """<H> in the lab frame, via spectral derivatives.

    Rotation-invariant terms and <L_z> are frame independent, so this can
    be evaluated directly on the co-rotating amplitudes produced by evolve.
    """
    grid = wf.grid
    psi = wf.psi
    h = grid.spacing
    hbar = params.hbar
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=h)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    ft = scipy.fft.fft2(psi)
    w = h * h
    kin = hbar**2 / (2.0 * params.mu) * np.vdot(ft, (kx**2 + ky**2) * ft) / ft.size * w
    pot = np.vdot(psi, _potential(params, grid) * psi) * w
    px = scipy.fft.ifft2(hbar * kx * ft)
    py = scipy.fft.ifft2(hbar * ky * ft)
    xg, yg = grid.axes()
    lz = np.vdot(psi, xg * py - yg * px) * w
    return float((kin + pot + params.omegaL * lz).real)
