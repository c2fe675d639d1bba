"""Symplectic trajectory, action, and monodromy propagation.

The Hamiltonian is not of kinetic-plus-potential form: the magnetic term
``omegaL * L_z`` couples momenta and positions.  It is therefore split as

* ``A = p^2/(2 mu) + omegaL * L_z`` - a linear flow integrated in closed
  form (a rigid rotation of q and p at the Larmor frequency combined with
  a free drift),
* ``B = (mu Omega^2 / 2) q^2 + kappa/|q|`` - a momentum kick.

One step is the Strang composition B(dt/2) A(dt) B(dt/2), second order and
exactly symplectic.  The classical action accumulates the Lagrangian
``p^2/(2 mu) - V(q)`` evaluated at the midpoint of the A segment (the
magnetic contribution to ``p . dq/dt - H`` cancels identically), and the
4x4 monodromy matrix advances with the exact tangent map of the same
composition, so ``M^T J M = J`` holds to roundoff at every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    ORIGIN_FLOOR,
    DotParameters,
    PhasePoint,
    SingularOriginError,
    hamiltonian,
    hessian,
)

__all__ = [
    "IntegratorConfig",
    "TrajectoryState",
    "initial_state",
    "step",
    "propagate",
    "monodromy_check",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, step count, and validity thresholds for propagation."""

    dt: float = 2e-3
    n_steps: int = 1000
    energy_tol: float = 1e-4
    origin_floor: float = ORIGIN_FLOOR

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps}")


@dataclass
class TrajectoryState:
    """Phase point plus accumulated action and monodromy at time t."""

    point: PhasePoint
    action: float
    monodromy: np.ndarray
    t: float
    energy0: float


def initial_state(point: PhasePoint, params: DotParameters) -> TrajectoryState:
    """Trajectory state at t = 0: zero action, identity monodromy."""
    return TrajectoryState(
        point=PhasePoint(point.q.copy(), point.p.copy()),
        action=0.0,
        monodromy=np.eye(4),
        t=0.0,
        energy0=float(hamiltonian(point, params)),
    )


def _potential_and_force(q, params: DotParameters, floor: float):
    """Potential V(q) of the kick Hamiltonian and its gradient."""
    r2 = q[0] * q[0] + q[1] * q[1]
    r = math.sqrt(r2)
    if params.kappa > 0 and r < floor:
        raise SingularOriginError(f"|q| = {r:.3e} below origin floor {floor:.1e}")
    k = params.mu * params.Omega**2
    v = 0.5 * k * r2
    gx, gy = k * q[0], k * q[1]
    if params.kappa > 0:
        v += params.kappa / r
        c = params.kappa / (r2 * r)
        gx -= c * q[0]
        gy -= c * q[1]
    return v, np.array([gx, gy])


def _kick_matrix_blockrows(M, q, params: DotParameters, tau: float, floor: float):
    """Apply the tangent map of a kick of length tau to M in place."""
    hess = hessian(PhasePoint(q, np.zeros(2)), params, origin_floor=floor)
    c = hess[2:, 2:]
    M[0:2, :] -= tau * (c @ M[2:4, :])


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def step(state: TrajectoryState, params: DotParameters, dt: float,
         *, origin_floor: float = ORIGIN_FLOOR) -> TrajectoryState:
    """Advance one Strang step of length dt.

    Returns a new state; raises SingularOriginError or ValueError (non-finite
    state) rather than flagging, so callers can decide how to handle failures.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    q = state.point.q.copy()
    p = state.point.p.copy()
    M = state.monodromy.copy()
    mu = params.mu

    # kick dt/2
    _, g = _potential_and_force(q, params, origin_floor)
    _kick_matrix_blockrows(M, q, params, 0.5 * dt, origin_floor)
    p -= 0.5 * dt * g

    # A flow, first half; midpoint used for the action quadrature
    rot_half = _rotation(params.omegaL * 0.5 * dt)
    q = rot_half @ (q + (0.5 * dt / mu) * p)
    p = rot_half @ p
    v_mid, _ = _potential_and_force(q, params, origin_floor)
    action = state.action + dt * ((p[0] ** 2 + p[1] ** 2) / (2.0 * mu) - v_mid)

    # A flow, second half, and the exact tangent map of the full A segment
    q = rot_half @ (q + (0.5 * dt / mu) * p)
    p = rot_half @ p
    rot_full = _rotation(params.omegaL * dt)
    M[2:4, :] = rot_full @ (M[2:4, :] + (dt / mu) * M[0:2, :])
    M[0:2, :] = rot_full @ M[0:2, :]

    # kick dt/2
    _, g = _potential_and_force(q, params, origin_floor)
    _kick_matrix_blockrows(M, q, params, 0.5 * dt, origin_floor)
    p -= 0.5 * dt * g

    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p)) and np.isfinite(action)):
        raise ValueError("non-finite state encountered during step")

    return TrajectoryState(
        point=PhasePoint(q, p),
        action=action,
        monodromy=M,
        t=state.t + dt,
        energy0=state.energy0,
    )


def propagate(initial: PhasePoint, params: DotParameters, cfg: IntegratorConfig,
              observer=None) -> tuple[TrajectoryState, bool]:
    """Run cfg.n_steps steps from `initial`.

    The observer, if given, is called with the state after every step.
    Returns the final state and a discard flag which is set when the energy
    drifts beyond cfg.energy_tol relative to its initial value, the origin
    floor is hit, or the state turns non-finite; propagation stops at the
    first violation.
    """
    state = initial_state(initial, params)
    scale = max(1.0, abs(state.energy0))
    for _ in range(cfg.n_steps):
        try:
            state = step(state, params, cfg.dt, origin_floor=cfg.origin_floor)
        except (SingularOriginError, ValueError):
            return state, True
        energy = float(hamiltonian(state.point, params, origin_floor=cfg.origin_floor))
        if abs(energy - state.energy0) / scale > cfg.energy_tol:
            return state, True
        if observer is not None:
            observer(state)
    return state, False


def monodromy_check(initial: PhasePoint, params: DotParameters,
                    cfg: IntegratorConfig, eps: float = 1e-6) -> float:
    """Max-norm deviation between M(t) and a finite-difference Jacobian.

    Propagates eight trajectories displaced by +/- eps along each phase-space
    coordinate (ordering p_x, p_y, q_x, q_y) and differences their endpoints.
    """
    centre, discarded = propagate(initial, params, cfg)
    if discarded:
        raise RuntimeError("centre trajectory discarded; cannot compare monodromy")
    jac = np.empty((4, 4))
    for col in range(4):
        ends = []
        for sign in (+1.0, -1.0):
            z = np.concatenate([initial.p, initial.q])
            z[col] += sign * eps
            pt = PhasePoint(q=z[2:], p=z[:2])
            end, discarded = propagate(pt, params, cfg)
            if discarded:
                raise RuntimeError("perturbed trajectory discarded during check")
            ends.append(np.concatenate([end.point.p, end.point.q]))
        jac[:, col] = (ends[0] - ends[1]) / (2.0 * eps)
    return float(np.max(np.abs(jac - centre.monodromy)))
