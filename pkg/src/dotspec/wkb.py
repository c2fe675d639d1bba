"""Energy-domain route: radial quantization of the separable relative motion.

The relative problem separates in polar coordinates.  For azimuthal
quantum number m the radial motion sees the effective potential

    V_eff(r) = hbar^2 m^2 / (2 mu r^2) + (mu Omega^2 / 2) r^2 + kappa / r

where the centrifugal coefficient is m^2, not m^2 - 1/4: the 2D Langer
rule has already been applied.  Quantizing the radial action integral

    I(e) = int_{r1}^{r2} sqrt(2 mu (e - V_eff(r))) dr  =  pi hbar (n_r + 1/2)

and restoring the angular-momentum energy gives

    E(n_r, m) = e - m hbar omegaL.

The sign convention follows the closed form below: positive m is lowered
by the field.  Without the Coulomb term this quantization is exact and
reproduces fock_darwin for every (n_r, m), which pins both the Maslov
constant 1/2 and the sign of the Larmor shift.

The integrand vanishes like a square root at both turning points (simple
roots of a quartic), so Gauss-Chebyshev quadrature of the second kind
converges spectrally after factoring out sqrt((r - r1)(r2 - r)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import DotParameters

__all__ = [
    "BelowBarrierError",
    "WkbLevel",
    "fock_darwin",
    "radial_action",
    "wkb_energy",
    "wkb_table",
    "turning_points",
    "write_wkb_csv",
]

_N_NODES = 256


class BelowBarrierError(ValueError):
    """No classically allowed radial interval at the requested energy."""


@dataclass(frozen=True)
class WkbLevel:
    n_r: int
    m: int
    energy: float


def fock_darwin(n_r: int, m: int, params: DotParameters) -> float:
    """Closed-form level (2 n_r + |m| + 1) hbar Omega - m hbar omegaL.

    Exact for kappa = 0; reduces to the Landau ladder (2 n_r + 1) hbar
    omegaL for omega0 = 0 and m >= 0.
    """
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    return (2 * n_r + abs(m) + 1) * params.hbar * params.Omega \
        - m * params.hbar * params.omegaL


def _quartic_coeffs(e_rad: float, m: int, params: DotParameters):
    """Coefficients of P(r) = 2 mu e r^2 - hbar^2 m^2 - mu^2 Om^2 r^4 - 2 mu kappa r."""
    mu = params.mu
    return (
        -(mu * params.Omega) ** 2,
        0.0,
        2.0 * mu * e_rad,
        -2.0 * mu * params.kappa,
        -((params.hbar * m) ** 2),
    )


def _polish_root(coeffs, r: float) -> float:
    c4, c3, c2, c1, c0 = coeffs
    for _ in range(8):
        p = (((c4 * r + c3) * r + c2) * r + c1) * r + c0
        dp = ((4 * c4 * r + 3 * c3) * r + 2 * c2) * r + c1
        if dp == 0:
            break
        delta = p / dp
        r -= delta
        if abs(delta) < 1e-15 * max(1.0, abs(r)):
            break
    return r


def _veff_minimum(m: int, params: DotParameters) -> float:
    """Minimum of the effective radial potential over r > 0."""
    mu, kap, hb = params.mu, params.kappa, params.hbar
    k = mu * params.Omega**2

    def veff(r):
        v = 0.5 * k * r * r
        if m != 0:
            v += (hb * m) ** 2 / (2.0 * mu * r * r)
        if kap > 0:
            v += kap / r
        return v

    if m == 0 and kap == 0:
        return 0.0
    if m == 0:
        return veff((kap / k) ** (1.0 / 3.0))

    def dveff(r):
        d = k * r - (hb * m) ** 2 / (mu * r**3)
        if kap > 0:
            d -= kap / r**2
        return d

    lo, hi = 1e-9, 1.0
    while dveff(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the effective-potential minimum")
    return veff(brentq(dveff, lo, hi, xtol=1e-14, rtol=8.9e-16))


def turning_points(e_rad: float, m: int, params: DotParameters) -> tuple[float, float]:
    """Positive turning points (r1, r2) bracketing the allowed interval.

    Roots of the turning-point quartic come from its companion matrix and
    are polished by Newton iteration.  Raises BelowBarrierError when no
    classically allowed interval exists (including the degenerate
    equal-root case at the potential minimum).
    """
    coeffs = _quartic_coeffs(e_rad, m, params)
    roots = np.roots(coeffs)
    tol = 1e-9
    real = [r.real for r in roots if abs(r.imag) <= tol * (1.0 + abs(r))]
    positive = sorted(_polish_root(coeffs, r) for r in real if r > tol)

    def pval(r):
        c4, c3, c2, c1, c0 = coeffs
        return (((c4 * r + c3) * r + c2) * r + c1) * r + c0

    intervals = []
    for a, b in zip(positive, positive[1:]):
        if b - a > 1e-12 * max(1.0, b) and pval(0.5 * (a + b)) > 0:
            intervals.append((a, b))
    if len(intervals) != 1:
        raise BelowBarrierError(
            f"no classically allowed interval at radial energy {e_rad!r} (m={m})"
        )
    return intervals[0]


def _radial_action_from_e_rad(e_rad: float, m: int, params: DotParameters) -> float:
    mu = params.mu
    if m == 0 and params.kappa == 0:
        # single closed form: the allowed region is [0, r2] and the
        # integrand sqrt(2 mu e - mu^2 Om^2 r^2) is smooth at r = 0
        if e_rad <= 0:
            raise BelowBarrierError("radial energy below the potential minimum")
        return 0.5 * math.pi * e_rad / params.Omega
    r1, r2 = turning_points(e_rad, m, params)
    half = 0.5 * (r2 - r1)
    mid = 0.5 * (r2 + r1)
    i = np.arange(1, _N_NODES + 1)
    ang = i * np.pi / (_N_NODES + 1)
    nodes = np.cos(ang)
    wts = np.pi / (_N_NODES + 1) * np.sin(ang) ** 2
    r = mid + half * nodes
    # Factor the quartic as (mu Omega)^2 (r - r1)(r2 - r) Q(r); the monic
    # quadratic Q over the remaining roots follows from Vieta (the cubic
    # coefficient vanishes, so r3 + r4 = -(r1 + r2)).
    c4, _, _, _, c0 = _quartic_coeffs(e_rad, m, params)
    q = r * r + (r1 + r2) * r + c0 / (c4 * r1 * r2)
    g = np.maximum((mu * params.Omega) ** 2 * q, 0.0)
    return float(half * half * np.sum(wts * np.sqrt(g) / r))


def radial_action(E: float, m: int, params: DotParameters) -> float:
    """Action integral between the radial turning points at total energy E.

    The conserved angular-momentum energy is removed first; with the sign
    convention of fock_darwin the radial energy is e = E + m hbar omegaL.
    Monotonically increasing in E.
    """
    return _radial_action_from_e_rad(E + m * params.hbar * params.omegaL, m, params)


def wkb_energy(n_r: int, m: int, params: DotParameters) -> float:
    """Root of I(e) = pi hbar (n_r + 1/2), shifted by the Larmor term."""
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    target = math.pi * params.hbar * (n_r + 0.5)
    vmin = _veff_minimum(m, params)

    def f(e):
        try:
            return _radial_action_from_e_rad(e, m, params) - target
        except BelowBarrierError:
            return -target

    scale = max(1.0, abs(vmin))
    lo = vmin + 1e-11 * scale
    hi = vmin + scale
    for _ in range(80):
        if f(hi) > 0:
            break
        hi = vmin + 2.0 * (hi - vmin)
    else:
        raise RuntimeError("failed to bracket the quantization root")
    e_rad = brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16)
    return e_rad - m * params.hbar * params.omegaL


def wkb_table(params: DotParameters, n_r_values, m_values) -> list[WkbLevel]:
    """Levels for all (n_r, m) combinations, sorted by energy."""
    levels = [
        WkbLevel(n_r=n_r, m=m, energy=wkb_energy(n_r, m, params))
        for n_r in n_r_values
        for m in m_values
    ]
    levels.sort(key=lambda lvl: lvl.energy)
    return levels


def write_wkb_csv(path, levels: list[WkbLevel], header: dict | None = None):
    """CSV with columns n_r, m, E_wkb and '#' comment metadata lines."""
    lines = [f"# {key}: {val}" for key, val in (header or {}).items()]
    lines.append("n_r,m,E_wkb")
    for lvl in levels:
        lines.append(f"{lvl.n_r},{lvl.m},{lvl.energy:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
