"""Relative-motion Hamiltonian of two trapped electrons in a magnetic field.

All quantities are dimensionless.  The relative coordinate ``q`` and momentum
``p`` live in the plane; the magnetic field enters through the Larmor
frequency ``omegaL`` multiplying the angular momentum ``L_z = p_y q_x - q_y p_x``
(symmetric gauge), and the effective trap frequency is
``Omega = sqrt(omega0**2 + omegaL**2)``.

The phase-space ordering used throughout the package is
``(p_x, p_y, q_x, q_y)``: gradients are returned in that order and 4x4
matrices (Hessian, monodromy, symplectic form) use it for both axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DotParameters",
    "PhasePoint",
    "SYMPLECTIC_J",
    "SingularOriginError",
    "hamiltonian",
    "gradient",
    "hessian",
]

#: Default minimum distance from the Coulomb singularity.  The repulsive
#: potential makes q = 0 classically inaccessible at finite energy, so a
#: trajectory reaching this floor indicates integrator failure.
ORIGIN_FLOOR = 1e-12

#: Skew-symmetric form J = [[0, I], [-I, 0]] in (p, q) block ordering.
SYMPLECTIC_J = np.block(
    [[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]]
)
SYMPLECTIC_J.setflags(write=False)


class SingularOriginError(ValueError):
    """Raised when the Coulomb term is evaluated too close to the origin."""


@dataclass(frozen=True)
class DotParameters:
    """Physical constants of the relative-motion problem.

    Parameters
    ----------
    mu : float
        Reduced mass (default 1).
    omega0 : float
        Harmonic confinement frequency.
    omegaL : float
        Larmor frequency e*B/(2 m*).
    kappa : float
        Coulomb coupling strength; 0 switches the interaction off.
    hbar : float
        Action scale (default 1).

    The derived effective frequency ``Omega = sqrt(omega0**2 + omegaL**2)``
    is computed on construction.
    """

    mu: float = 1.0
    omega0: float = 1.0
    omegaL: float = 1.0
    kappa: float = 1.0
    hbar: float = 1.0
    Omega: float = field(init=False)

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.omega0 < 0 or self.omegaL < 0:
            raise ValueError("omega0 and omegaL must be non-negative")
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if self.omega0 == 0 and self.omegaL == 0:
            raise ValueError("omega0 and omegaL cannot both vanish (unbound motion)")
        object.__setattr__(self, "Omega", math.hypot(self.omega0, self.omegaL))


@dataclass
class PhasePoint:
    """A point (q, p) of the 4D relative phase space.

    ``q`` and ``p`` are length-2 arrays; batched shapes ``(..., 2)`` are
    accepted by all operations below, which then return correspondingly
    batched results.
    """

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.q.shape[-1] != 2 or self.p.shape != self.q.shape:
            raise ValueError("q and p must have matching shapes (..., 2)")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("phase-space components must be finite")


def _radius(q: np.ndarray, params: DotParameters, floor: float) -> np.ndarray:
    r = np.sqrt(np.sum(q * q, axis=-1))
    if params.kappa > 0 and np.any(r < floor):
        raise SingularOriginError(
            f"|q| = {float(np.min(r)):.3e} below origin floor {floor:.1e} "
            "with kappa > 0"
        )
    return r


def hamiltonian(s: PhasePoint, params: DotParameters, *, origin_floor: float = ORIGIN_FLOOR) -> np.ndarray:
    """Energy p^2/(2 mu) + (mu Omega^2/2) q^2 + omegaL*L_z + kappa/|q|."""
    q, p = s.q, s.p
    r = _radius(q, params, origin_floor)
    kin = np.sum(p * p, axis=-1) / (2.0 * params.mu)
    conf = 0.5 * params.mu * params.Omega**2 * np.sum(q * q, axis=-1)
    lz = p[..., 1] * q[..., 0] - q[..., 1] * p[..., 0]
    h = kin + conf + params.omegaL * lz
    if params.kappa > 0:
        h = h + params.kappa / r
    return h


def gradient(s: PhasePoint, params: DotParameters, *, origin_floor: float = ORIGIN_FLOOR) -> np.ndarray:
    """Phase-space gradient (dH/dp_x, dH/dp_y, dH/dq_x, dH/dq_y).

    Hamilton's equations follow as ``dq/dt = out[..., :2]`` and
    ``dp/dt = -out[..., 2:]``.
    """
    q, p = s.q, s.p
    r = _radius(q, params, origin_floor)
    mu, wl = params.mu, params.omegaL
    out = np.empty(q.shape[:-1] + (4,))
    out[..., 0] = p[..., 0] / mu - wl * q[..., 1]
    out[..., 1] = p[..., 1] / mu + wl * q[..., 0]
    out[..., 2] = mu * params.Omega**2 * q[..., 0] + wl * p[..., 1]
    out[..., 3] = mu * params.Omega**2 * q[..., 1] - wl * p[..., 0]
    if params.kappa > 0:
        coul = params.kappa / r**3
        out[..., 2] -= coul * q[..., 0]
        out[..., 3] -= coul * q[..., 1]
    return out


def hessian(s: PhasePoint, params: DotParameters, *, origin_floor: float = ORIGIN_FLOOR) -> np.ndarray:
    """Symmetric 4x4 second-derivative matrix in (p_x, p_y, q_x, q_y) ordering."""
    q = s.q
    r = _radius(q, params, origin_floor)
    mu, wl = params.mu, params.omegaL
    out = np.zeros(q.shape[:-1] + (4, 4))
    out[..., 0, 0] = out[..., 1, 1] = 1.0 / mu
    # mixed p-q block from omegaL * L_z
    out[..., 0, 3] = -wl
    out[..., 1, 2] = wl
    out[..., 3, 0] = -wl
    out[..., 2, 1] = wl
    # confinement
    out[..., 2, 2] = out[..., 3, 3] = mu * params.Omega**2
    if params.kappa > 0:
        # d^2 (kappa/r) / dq_i dq_j = kappa (3 q_i q_j - r^2 delta_ij) / r^5
        r2 = r * r
        c = params.kappa / r2 / r2 / r
        qx, qy = q[..., 0], q[..., 1]
        out[..., 2, 2] += c * (3.0 * qx * qx - r2)
        out[..., 3, 3] += c * (3.0 * qy * qy - r2)
        cross = c * 3.0 * qx * qy
        out[..., 2, 3] += cross
        out[..., 3, 2] += cross
    return out
