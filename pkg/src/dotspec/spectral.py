"""Fourier transform of correlation series and peak extraction.

The spectrum is the discrete approximation of

    S(omega) = (1 / 2 pi hbar) * integral dt e^{i omega t} c(t)

so a mode e^{-i E t / hbar} in c(t) produces a peak at omega = E / hbar.
Intensity is reported as |S|; peak heights are meaningful up to the window
normalization only, which is irrelevant for eigenvalue extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hk import CorrelationSeries

__all__ = ["Peak", "SpectrumResult", "spectrum", "find_peaks", "label_peaks",
           "write_spectrum_csv", "peaks_to_json"]


@dataclass
class Peak:
    """A spectral line: position, height, and an optional (n_r, m) label."""

    energy: float
    height: float
    n_r: int | None = None
    m: int | None = None
    distance: float | None = None


@dataclass
class SpectrumResult:
    """Spectral intensity on a uniform frequency grid."""

    omegas: np.ndarray
    intensity: np.ndarray
    peaks: list[Peak] = field(default_factory=list)
    window: str = "hann"
    T: float = 0.0

    @property
    def domega(self) -> float:
        """Intrinsic frequency resolution 2 pi / T of the signal."""
        return 2.0 * np.pi / self.T


def _window_values(window: str, n: int) -> np.ndarray:
    """Window on the t >= 0 half-axis, decaying away from t = 0.

    The transform extends the signal to negative times by conjugate
    symmetry, so the effective window on [-T, T] is w(|t|): "hann" is the
    half of the symmetric Hann bump that starts at 1 and falls to 0 at T.
    """
    if window == "rectangular":
        return np.ones(n)
    if window == "hann":
        k = np.arange(n)
        return 0.5 * (1.0 + np.cos(np.pi * k / (n - 1)))
    raise ValueError(f"unknown window {window!r}")


def spectrum(series: CorrelationSeries, window: str = "hann",
             pad_factor: int = 4, hbar: float = 1.0) -> SpectrumResult:
    """Windowed transform of c(t) on a zero-padded frequency grid.

    The autocorrelation obeys c(-t) = conj(c(t)), so the integral over all
    times reduces to twice the real part of the one-sided transform (minus
    the half-counted t = 0 sample):

        S(omega) = (dt / 2 pi hbar) * [2 Re sum_k w_k c_k e^{i omega t_k}
                                       - w_0 Re c_0]

    The real lineshape keeps closely spaced lines from interfering through
    the phase winding a one-sided transform would introduce.  Zero padding
    (pad_factor x) smooths the peak shapes so quadratic refinement in
    find_peaks works below the grid spacing 2 pi / (pad_factor * T).
    """
    times = series.times
    if times.size < 2:
        raise ValueError("need at least 2 samples to transform")
    if int(pad_factor) != pad_factor or pad_factor < 1:
        raise ValueError("pad_factor must be a positive integer")
    pad_factor = int(pad_factor)
    dt = times[1] - times[0]
    steps = np.diff(times)
    if np.any(steps <= 0) or not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ValueError("time grid must be uniform")
    if abs(times[0]) > 1e-9 * dt:
        raise ValueError("the series must start at t = 0 (conjugate-symmetric "
                         "extension to t < 0)")
    win = _window_values(window, times.size)
    nfft = pad_factor * times.size
    # ifft supplies the e^{+i omega t} kernel; undo its 1/nfft normalization
    one_sided = np.fft.ifft(win * series.values, n=nfft) * nfft
    coeff = (2.0 * one_sided.real - win[0] * series.values[0].real) \
        * dt / (2.0 * np.pi * hbar)
    omegas = 2.0 * np.pi * np.fft.fftfreq(nfft, d=dt)
    order = np.fft.fftshift(np.arange(nfft))
    return SpectrumResult(
        omegas=omegas[order],
        intensity=np.abs(coeff[order]),
        peaks=[],
        window=window,
        T=float(times[-1] - times[0]),
    )


def find_peaks(spec: SpectrumResult, threshold: float = 0.05) -> list[Peak]:
    """Local maxima above threshold * max intensity, refined to sub-grid.

    Each maximum is polished by fitting a parabola through the three
    surrounding samples; for an exactly quadratic peak this recovers the
    vertex to roundoff.  Peaks are returned sorted by energy.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    y = spec.intensity
    if y.size < 3 or np.max(y) == 0:
        return []
    floor = threshold * np.max(y)
    inner = y[1:-1]
    mask = (inner > y[:-2]) & (inner >= y[2:]) & (inner >= floor)
    peaks = []
    dw = spec.omegas[1] - spec.omegas[0]
    for i in np.nonzero(mask)[0] + 1:
        ym, y0, yp = y[i - 1], y[i], y[i + 1]
        denom = ym - 2.0 * y0 + yp
        delta = 0.0 if denom == 0 else 0.5 * (ym - yp) / denom
        energy = spec.omegas[i] + delta * dw
        height = y0 - 0.25 * (ym - yp) * delta
        peaks.append(Peak(energy=float(energy), height=float(height)))
    peaks.sort(key=lambda p: p.energy)
    return peaks


def label_peaks(peaks: list[Peak], wkb_table) -> list[Peak]:
    """Assign each peak the (n_r, m) of the nearest table energy.

    wkb_table rows are (n_r, m, energy) tuples or objects with those
    attributes; the assignment distance is recorded on each peak.
    """
    rows = []
    for entry in wkb_table:
        if hasattr(entry, "energy"):
            rows.append((int(entry.n_r), int(entry.m), float(entry.energy)))
        else:
            n_r, m, energy = entry
            rows.append((int(n_r), int(m), float(energy)))
    if not rows and peaks:
        raise ValueError("wkb_table must be non-empty")
    labelled = []
    for p in peaks:
        n_r, m, energy = min(rows, key=lambda row: abs(row[2] - p.energy))
        labelled.append(Peak(energy=p.energy, height=p.height, n_r=n_r, m=m,
                             distance=abs(energy - p.energy)))
    return labelled


def write_spectrum_csv(path, spec: SpectrumResult, header: dict | None = None):
    """CSV with columns omega, intensity and '#' comment metadata lines."""
    lines = []
    for key, val in (header or {}).items():
        lines.append(f"# {key}: {val}")
    lines.append(f"# window: {spec.window}")
    lines.append(f"# T: {spec.T!r}")
    lines.append("omega,intensity")
    for w, s in zip(spec.omegas, spec.intensity):
        lines.append(f"{float(w):.17g},{float(s):.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def peaks_to_json(peaks: list[Peak]) -> list[dict]:
    """Peak list as plain dicts for JSON serialization."""
    return [
        {
            "energy": p.energy,
            "height": p.height,
            "n_r": p.n_r,
            "m": p.m,
            "distance": p.distance,
        }
        for p in peaks
    ]
