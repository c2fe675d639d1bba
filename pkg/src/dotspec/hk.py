"""Semiclassical autocorrelation from an ensemble of frozen Gaussians.

The propagated wavefunction is a phase-space integral over Gaussians of
fixed width carried along classical trajectories, each weighted by the
exponential of the classical action and by the square root of a
determinant built from monodromy sub-blocks.  Overlaps with the initial
Gaussian are analytic, so the autocorrelation

    c(t) = <Psi(0) | Psi(t)>

reduces to a Monte-Carlo average over initial conditions drawn from the
squared modulus of the initial overlap.  The square-root branch is kept
continuous in time per trajectory by unwrapping the phase of the
determinant.

The ensemble is integrated by a compiled kernel (numba) over fixed-size
sub-blocks; per-block partial sums are reduced in a fixed order so results
are bit-reproducible for a given seed regardless of thread count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .dynamics import IntegratorConfig, initial_state, step
from .model import DotParameters, PhasePoint, SingularOriginError, hamiltonian

__all__ = [
    "BranchAmbiguityError",
    "GaussianState",
    "HKConfig",
    "CorrelationSeries",
    "standard_packet",
    "overlap_gaussian",
    "hk_prefactor",
    "continuous_sqrt",
    "sample_initial",
    "autocorrelation",
    "write_correlation_csv",
    "read_correlation_csv",
]

_SUB_BLOCK = 1024  # trajectories per deterministic partial sum


class BranchAmbiguityError(RuntimeError):
    """Phase of det(h) jumped by >= pi between samples; reduce the step size."""


@dataclass(frozen=True)
class GaussianState:
    """Frozen Gaussian: center, momentum, and diagonal width matrix.

    The position representation is

        (det(gamma)/pi^2)^(1/4) * exp(-(r-q)^T gamma (r-q)/2 + i p.(r-q)/hbar)

    ``gamma`` holds the two diagonal entries of the width matrix.
    """

    q_center: np.ndarray
    p_center: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q_center", np.asarray(self.q_center, dtype=float))
        object.__setattr__(self, "p_center", np.asarray(self.p_center, dtype=float))
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim == 0:
            g = np.array([float(g), float(g)])
        elif g.shape == (2, 2):
            if np.any(g != np.diag(np.diag(g))):
                raise ValueError("gamma must be diagonal")
            g = np.diag(g).copy()
        object.__setattr__(self, "gamma", g)
        if self.q_center.shape != (2,) or self.p_center.shape != (2,):
            raise ValueError("q_center and p_center must be length-2 vectors")
        if self.gamma.shape != (2,) or np.any(self.gamma <= 0):
            raise ValueError("gamma diagonal entries must be positive")


def standard_packet() -> GaussianState:
    """Initial wavepacket used by the default runs.

    Width exp(-alpha r^2) with alpha = 0.25, i.e. gamma = 2*alpha = 0.5,
    centered at q = (1, 0) with momentum p = (0, -1); matches the frozen
    Gaussian width so the initial state is itself a basis Gaussian.
    """
    return GaussianState(q_center=[1.0, 0.0], p_center=[0.0, -1.0], gamma=0.5)


def _overlap_arrays(qb, pb, qk, pk, gamma, hbar):
    """<g(pb, qb) | g(pk, qk)> for Gaussians sharing a diagonal width.

    Broadcasts over leading axes of the (…, 2) inputs.
    """
    dq = qb - qk
    dp = pb - pk
    ps = pb + pk
    quad = -0.25 * np.sum(gamma * dq * dq, axis=-1) \
        - 0.25 / hbar**2 * np.sum(dp * dp / gamma, axis=-1)
    phase = 0.5 / hbar * np.sum(dq * ps, axis=-1)
    return np.exp(quad + 1j * phase)


def overlap_gaussian(bra: GaussianState, ket: GaussianState, hbar: float = 1.0) -> complex:
    """Analytic overlap of two frozen Gaussians with identical widths."""
    if not np.array_equal(bra.gamma, ket.gamma):
        raise ValueError("overlap requires matching width matrices")
    return complex(
        _overlap_arrays(bra.q_center, bra.p_center, ket.q_center, ket.p_center,
                        bra.gamma, hbar)
    )


def hk_prefactor(monodromy: np.ndarray, gamma: np.ndarray, hbar: float = 1.0):
    """Prefactor matrix h and det(h) from monodromy sub-blocks.

        h = (m_pp + G m_qq G^-1 - i hbar G m_qp + (i/hbar) m_pq G^-1) / 2

    with G the diagonal width matrix, m_pp = dp_t/dp', m_pq = dp_t/dq',
    m_qp = dq_t/dp', m_qq = dq_t/dq'.  Accepts a single (4, 4) matrix or a
    batch (..., 4, 4); returns (h, det_h) with matching leading shape.
    """
    m = np.asarray(monodromy, dtype=float)
    g = np.asarray(gamma, dtype=float)
    if g.ndim == 0:
        g = np.array([float(g), float(g)])
    m_pp = m[..., 0:2, 0:2]
    m_pq = m[..., 0:2, 2:4]
    m_qp = m[..., 2:4, 0:2]
    m_qq = m[..., 2:4, 2:4]
    ratio = g[:, None] / g[None, :]
    h = 0.5 * (
        m_pp
        + ratio * m_qq
        - 1j * hbar * g[:, None] * m_qp
        + (1j / hbar) * m_pq / g[None, :]
    )
    det = h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] * h[..., 1, 0]
    return h, det


def continuous_sqrt(det_series: np.ndarray) -> np.ndarray:
    """Square root of a complex series with a time-continuous branch.

    The accumulated phase of the input is unwrapped and halved, so the
    output picks up a sign after the input winds once around the origin.
    Raises BranchAmbiguityError when consecutive phase jumps reach pi,
    which signals an undersampled series.
    """
    s = np.asarray(det_series, dtype=complex)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("det_series must be a non-empty 1D sequence")
    ang = np.angle(s)
    d = np.diff(ang)
    d -= 2.0 * np.pi * np.round(d / (2.0 * np.pi))
    if np.any(np.abs(d) >= np.pi - 1e-9):
        raise BranchAmbiguityError(
            "consecutive phase jump of det(h) reached pi; decrease dt or "
            "the recording stride"
        )
    theta = np.concatenate([[ang[0]], ang[0] + np.cumsum(d)])
    return np.sqrt(np.abs(s)) * np.exp(0.5j * theta)


@dataclass(frozen=True)
class HKConfig:
    """Ensemble size, seeding, and sampling cadence for the propagation."""

    n_trajectories: int = 1_000_000
    seed: int = 0
    record_stride: int = 5
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.integrator.n_steps % self.record_stride != 0:
            raise ValueError("n_steps must be a multiple of record_stride")


@dataclass
class CorrelationSeries:
    """Complex autocorrelation on a uniform time grid with run metadata."""

    times: np.ndarray
    values: np.ndarray
    n_used: int
    n_discarded: int
    seed: int
    stderr: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be matching 1D arrays")
        if self.times.size >= 2:
            dt = np.diff(self.times)
            if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
                raise ValueError("times must be strictly increasing and uniform")
        if not np.all(np.isfinite(self.values.view(float))):
            raise ValueError("correlation values must be finite")


def sample_initial(alpha_state: GaussianState, n: int, seed: int,
                   hbar: float = 1.0) -> tuple[PhasePoint, np.ndarray]:
    """Draw n weighted phase-space points for the Monte-Carlo average.

    Positions and momenta are normal around the packet center with
    per-coordinate variances 1/gamma and (hbar^2 gamma): the density is
    proportional to |<g(p', q')|Psi>|^2.  The returned complex weights are
    overlap / ((2 pi hbar)^2 * density); with this density the phase-space
    measure cancels and the weight reduces to overlap / |overlap|^2, making
    the t = 0 estimator exactly 1 regardless of n.

    Draw order (positions then momenta from one standard-normal block) is
    fixed so a given seed reproduces samples bit-exactly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 4))
    sig_q = 1.0 / np.sqrt(alpha_state.gamma)
    sig_p = hbar * np.sqrt(alpha_state.gamma)
    q = alpha_state.q_center + sig_q * z[:, 0:2]
    p = alpha_state.p_center + sig_p * z[:, 2:4]
    ov = _overlap_arrays(q, p, alpha_state.q_center, alpha_state.p_center,
                         alpha_state.gamma, hbar)
    weights = ov / np.abs(ov) ** 2
    return PhasePoint(q=q, p=p), weights


@njit(cache=True, parallel=True, fastmath={"contract", "reassoc", "arcp"})
def _ensemble_kernel(qp0, weights, mu, omega_l, omega2, kappa, hbar,
                     g1, g2, qax, qay, pax, pay,
                     dt, n_steps, stride, energy_tol, floor, sub_size):
    """Propagate all trajectories and accumulate per-sub-block partial sums.

    qp0 rows are (qx, qy, px, py).  Returns (sums, sqsums, discarded,
    branch_fail): complex partial sums and |contribution|^2 sums of shape
    (n_sub_blocks, n_records), plus per-trajectory status flags.

    The closing half-kick of one step and the opening half-kick of the next
    share the force and Hessian evaluated at the common boundary point, so
    each step costs a single Coulomb evaluation; the composition is exactly
    the Strang splitting because consecutive kicks at a frozen position
    commute.  The monodromy matrix lives in sixteen scalars (mRC, row R and
    column C in p_x, p_y, q_x, q_y ordering) to keep it in registers.
    """
    n = qp0.shape[0]
    n_rec = n_steps // stride + 1
    n_sub = (n + sub_size - 1) // sub_size
    sums = np.zeros((n_sub, n_rec), np.complex128)
    sqs = np.zeros((n_sub, n_rec), np.float64)
    discarded = np.zeros(n, np.uint8)
    branch_fail = np.zeros(n, np.uint8)

    half = 0.5 * dt
    ch = math.cos(omega_l * half)
    sh = math.sin(omega_l * half)
    cf = math.cos(omega_l * dt)
    sf = math.sin(omega_l * dt)
    muom2 = mu * omega2
    dtmu = dt / mu
    floor2 = floor * floor

    for b in prange(n_sub):
        buf = np.empty(n_rec, np.complex128)
        lo = b * sub_size
        hi = min(n, lo + sub_size)
        for i in range(lo, hi):
            qx = qp0[i, 0]
            qy = qp0[i, 1]
            px = qp0[i, 2]
            py = qp0[i, 3]
            w = weights[i]

            r2 = qx * qx + qy * qy
            if kappa > 0.0 and r2 < floor2:
                discarded[i] = 1
                continue
            e0 = 0.5 * (px * px + py * py) / mu + 0.5 * muom2 * r2 \
                + omega_l * (py * qx - qy * px)
            if kappa > 0.0:
                e0 += kappa / math.sqrt(r2)
            escale = max(1.0, abs(e0))

            m00 = 1.0; m01 = 0.0; m02 = 0.0; m03 = 0.0
            m10 = 0.0; m11 = 1.0; m12 = 0.0; m13 = 0.0
            m20 = 0.0; m21 = 0.0; m22 = 1.0; m23 = 0.0
            m30 = 0.0; m31 = 0.0; m32 = 0.0; m33 = 1.0
            action = 0.0
            theta = 0.0
            a_prev = 0.0

            # t = 0 record: det h = 1, action 0
            dqx = qx - qax
            dqy = qy - qay
            dpx = px - pax
            dpy = py - pay
            quad = -0.25 * (g1 * dqx * dqx + g2 * dqy * dqy) \
                - 0.25 / (hbar * hbar) * (dpx * dpx / g1 + dpy * dpy / g2)
            phase = -0.5 / hbar * (dqx * (px + pax) + dqy * (py + pay))
            buf[0] = w * math.exp(quad) * (math.cos(phase) + 1j * math.sin(phase))

            # force and Hessian at the current step boundary
            gx = muom2 * qx
            gy = muom2 * qy
            c00 = muom2
            c11 = muom2
            c01 = 0.0
            if kappa > 0.0:
                r = math.sqrt(r2)
                cr3 = kappa / (r2 * r)
                cr5 = cr3 / r2
                gx -= cr3 * qx
                gy -= cr3 * qy
                c00 += cr5 * (3.0 * qx * qx - r2)
                c11 += cr5 * (3.0 * qy * qy - r2)
                c01 += cr5 * 3.0 * qx * qy

            alive = True
            for s_ in range(1, n_steps + 1):
                # opening half-kick, boundary force already available
                px -= half * gx
                py -= half * gy
                hc00 = half * c00
                hc01 = half * c01
                hc11 = half * c11
                m00 -= hc00 * m20 + hc01 * m30
                m01 -= hc00 * m21 + hc01 * m31
                m02 -= hc00 * m22 + hc01 * m32
                m03 -= hc00 * m23 + hc01 * m33
                m10 -= hc01 * m20 + hc11 * m30
                m11 -= hc01 * m21 + hc11 * m31
                m12 -= hc01 * m22 + hc11 * m32
                m13 -= hc01 * m23 + hc11 * m33

                # A flow, first half
                ax = qx + half * px / mu
                ay = qy + half * py / mu
                qx = ch * ax - sh * ay
                qy = sh * ax + ch * ay
                tx = ch * px - sh * py
                py = sh * px + ch * py
                px = tx

                # midpoint action increment
                rm2 = qx * qx + qy * qy
                lag = 0.5 * (px * px + py * py) / mu - 0.5 * muom2 * rm2
                if kappa > 0.0:
                    if rm2 < floor2:
                        alive = False
                        break
                    lag -= kappa / math.sqrt(rm2)
                action += dt * lag

                # A flow, second half
                ax = qx + half * px / mu
                ay = qy + half * py / mu
                qx = ch * ax - sh * ay
                qy = sh * ax + ch * ay
                tx = ch * px - sh * py
                py = sh * px + ch * py
                px = tx

                # tangent map of the full A segment, column by column
                t2 = m20 + dtmu * m00
                t3 = m30 + dtmu * m10
                m20 = cf * t2 - sf * t3
                m30 = sf * t2 + cf * t3
                t0 = m00
                m00 = cf * t0 - sf * m10
                m10 = sf * t0 + cf * m10
                t2 = m21 + dtmu * m01
                t3 = m31 + dtmu * m11
                m21 = cf * t2 - sf * t3
                m31 = sf * t2 + cf * t3
                t0 = m01
                m01 = cf * t0 - sf * m11
                m11 = sf * t0 + cf * m11
                t2 = m22 + dtmu * m02
                t3 = m32 + dtmu * m12
                m22 = cf * t2 - sf * t3
                m32 = sf * t2 + cf * t3
                t0 = m02
                m02 = cf * t0 - sf * m12
                m12 = sf * t0 + cf * m12
                t2 = m23 + dtmu * m03
                t3 = m33 + dtmu * m13
                m23 = cf * t2 - sf * t3
                m33 = sf * t2 + cf * t3
                t0 = m03
                m03 = cf * t0 - sf * m13
                m13 = sf * t0 + cf * m13

                # closing half-kick at the new boundary
                r2 = qx * qx + qy * qy
                if kappa > 0.0 and r2 < floor2:
                    alive = False
                    break
                gx = muom2 * qx
                gy = muom2 * qy
                c00 = muom2
                c11 = muom2
                c01 = 0.0
                if kappa > 0.0:
                    r = math.sqrt(r2)
                    cr3 = kappa / (r2 * r)
                    cr5 = cr3 / r2
                    gx -= cr3 * qx
                    gy -= cr3 * qy
                    c00 += cr5 * (3.0 * qx * qx - r2)
                    c11 += cr5 * (3.0 * qy * qy - r2)
                    c01 += cr5 * 3.0 * qx * qy
                px -= half * gx
                py -= half * gy
                hc00 = half * c00
                hc01 = half * c01
                hc11 = half * c11
                m00 -= hc00 * m20 + hc01 * m30
                m01 -= hc00 * m21 + hc01 * m31
                m02 -= hc00 * m22 + hc01 * m32
                m03 -= hc00 * m23 + hc01 * m33
                m10 -= hc01 * m20 + hc11 * m30
                m11 -= hc01 * m21 + hc11 * m31
                m12 -= hc01 * m22 + hc11 * m32
                m13 -= hc01 * m23 + hc11 * m33

                # energy drift check at the true step boundary
                energy = 0.5 * (px * px + py * py) / mu + 0.5 * muom2 * r2 \
                    + omega_l * (py * qx - qy * px)
                if kappa > 0.0:
                    energy += kappa / math.sqrt(r2)
                if abs(energy - e0) / escale > energy_tol:
                    alive = False
                    break

                if s_ % stride == 0:
                    k = s_ // stride
                    # prefactor matrix from monodromy sub-blocks
                    h00 = 0.5 * (m00 + m22
                                 + (-1j * hbar * g1) * m20
                                 + (1j / (hbar * g1)) * m02)
                    h01 = 0.5 * (m01 + (g1 / g2) * m23
                                 + (-1j * hbar * g1) * m21
                                 + (1j / (hbar * g2)) * m03)
                    h10 = 0.5 * (m10 + (g2 / g1) * m32
                                 + (-1j * hbar * g2) * m30
                                 + (1j / (hbar * g1)) * m12)
                    h11 = 0.5 * (m11 + m33
                                 + (-1j * hbar * g2) * m31
                                 + (1j / (hbar * g2)) * m13)
                    det = h00 * h11 - h01 * h10
                    a = math.atan2(det.imag, det.real)
                    d = a - a_prev
                    d -= 2.0 * math.pi * math.floor(d / (2.0 * math.pi) + 0.5)
                    if abs(d) >= math.pi - 1e-9:
                        branch_fail[i] = 1
                        alive = False
                        break
                    theta += d
                    a_prev = a
                    sqrt_det = math.sqrt(abs(det)) * \
                        (math.cos(0.5 * theta) + 1j * math.sin(0.5 * theta))

                    dqx = qx - qax
                    dqy = qy - qay
                    dpx = px - pax
                    dpy = py - pay
                    quad = -0.25 * (g1 * dqx * dqx + g2 * dqy * dqy) \
                        - 0.25 / (hbar * hbar) * (dpx * dpx / g1 + dpy * dpy / g2)
                    phase = -0.5 / hbar * (dqx * (px + pax) + dqy * (py + pay))
                    ov = math.exp(quad) * (math.cos(phase) + 1j * math.sin(phase))

                    sact = action / hbar
                    buf[k] = w * sqrt_det * \
                        (math.cos(sact) + 1j * math.sin(sact)) * ov

            if alive:
                for k in range(n_rec):
                    v = buf[k]
                    sums[b, k] += v
                    sqs[b, k] += v.real * v.real + v.imag * v.imag
            else:
                discarded[i] = 1
    return sums, sqs, discarded, branch_fail


def _reference_engine(points: PhasePoint, weights, alpha_state, params, cfg):
    """Per-trajectory pure-Python path built from the public operations.

    Slow; used for small ensembles and as an independent cross-check of the
    compiled kernel.
    """
    integ = cfg.integrator
    n_rec = integ.n_steps // cfg.record_stride + 1
    n = points.q.shape[0]
    sums = np.zeros(n_rec, dtype=complex)
    sqs = np.zeros(n_rec)
    n_disc = 0
    hbar = params.hbar
    for i in range(n):
        state = initial_state(PhasePoint(points.q[i], points.p[i]), params)
        scale = max(1.0, abs(state.energy0))
        states = [state]
        discarded = False
        for _ in range(integ.n_steps):
            try:
                state = step(state, params, integ.dt, origin_floor=integ.origin_floor)
            except (SingularOriginError, ValueError):
                discarded = True
                break
            energy = float(hamiltonian(state.point, params,
                                       origin_floor=integ.origin_floor))
            if abs(energy - state.energy0) / scale > integ.energy_tol:
                discarded = True
                break
            states.append(state)
        if discarded:
            n_disc += 1
            continue
        recorded = states[:: cfg.record_stride]
        mono = np.stack([s.monodromy for s in recorded])
        _, det = hk_prefactor(mono, alpha_state.gamma, hbar)
        sqrt_det = continuous_sqrt(det)
        qt = np.stack([s.point.q for s in recorded])
        pt = np.stack([s.point.p for s in recorded])
        ov_t = np.conj(_overlap_arrays(qt, pt, alpha_state.q_center,
                                       alpha_state.p_center, alpha_state.gamma, hbar))
        act = np.array([s.action for s in recorded])
        contrib = weights[i] * sqrt_det * np.exp(1j * act / hbar) * ov_t
        sums += contrib
        sqs += np.abs(contrib) ** 2
    return sums, sqs, n_disc


def autocorrelation(alpha_state: GaussianState, params: DotParameters,
                    cfg: HKConfig, *, samples: PhasePoint | None = None,
                    engine: str = "numba", threads: int | None = None) -> CorrelationSeries:
    """Monte-Carlo estimate of c(t) = <Psi(0)|Psi(t)> on the record grid.

    Parameters
    ----------
    alpha_state : GaussianState
        Initial wavepacket; its width also sets the frozen-Gaussian basis.
    params, cfg : physics and run configuration.
    samples : PhasePoint, optional
        Explicit initial conditions with (n, 2) arrays, overriding the
        seeded sampler (used for diagnostics and tests).
    engine : {"numba", "reference"}
        Compiled kernel or the slow per-trajectory path.
    threads : int, optional
        Worker threads for the compiled kernel.

    The estimator divides by the number of surviving trajectories, so
    c(0) = 1 identically; the t = 0 deviation from 1 is therefore purely a
    floating-point diagnostic.  A warning is issued when more than 10% of
    trajectories are discarded.
    """
    integ = cfg.integrator
    if integ.n_steps % cfg.record_stride != 0:
        raise ValueError("n_steps must be a multiple of record_stride")
    if samples is not None:
        q = np.atleast_2d(samples.q)
        p = np.atleast_2d(samples.p)
        points = PhasePoint(q=q, p=p)
        ov = _overlap_arrays(q, p, alpha_state.q_center, alpha_state.p_center,
                             alpha_state.gamma, params.hbar)
        weights = ov / np.abs(ov) ** 2
    else:
        points, weights = sample_initial(alpha_state, cfg.n_trajectories,
                                         cfg.seed, params.hbar)
    n = points.q.shape[0]

    if engine == "reference":
        sums, sqs, n_disc = _reference_engine(points, weights, alpha_state, params, cfg)
    elif engine == "numba":
        if threads is not None:
            import numba

            numba.set_num_threads(max(1, threads))
        qp0 = np.concatenate([points.q, points.p], axis=1)
        g1, g2 = alpha_state.gamma
        sums_b, sqs_b, disc, branch = _ensemble_kernel(
            qp0, np.ascontiguousarray(weights, dtype=complex),
            params.mu, params.omegaL, params.Omega**2, params.kappa, params.hbar,
            g1, g2,
            alpha_state.q_center[0], alpha_state.q_center[1],
            alpha_state.p_center[0], alpha_state.p_center[1],
            integ.dt, integ.n_steps, cfg.record_stride,
            integ.energy_tol, integ.origin_floor, _SUB_BLOCK,
        )
        if np.any(branch):
            raise BranchAmbiguityError(
                f"{int(np.sum(branch))} trajectories hit a det(h) phase jump "
                ">= pi; decrease dt or record_stride"
            )
        sums = np.sum(sums_b, axis=0)
        sqs = np.sum(sqs_b, axis=0)
        n_disc = int(np.sum(disc))
    else:
        raise ValueError(f"unknown engine {engine!r}")

    n_used = n - n_disc
    if n_used == 0:
        raise RuntimeError("all trajectories were discarded")
    frac = n_disc / n
    if frac > 0.10:
        warnings.warn(f"discarded {frac:.1%} of trajectories", stacklevel=2)

    values = sums / n_used
    var = np.maximum(sqs / n_used - np.abs(values) ** 2, 0.0)
    stderr = np.sqrt(var / n_used)
    times = np.arange(values.size) * (integ.dt * cfg.record_stride)
    return CorrelationSeries(times=times, values=values, n_used=n_used,
                             n_discarded=n_disc, seed=cfg.seed, stderr=stderr)


def write_correlation_csv(path, series: CorrelationSeries, header: dict | None = None):
    """CSV with columns t, re_c, im_c and '#' comment lines of metadata."""
    lines = []
    meta = dict(header or {})
    meta.setdefault("seed", series.seed)
    meta.setdefault("n_used", series.n_used)
    meta.setdefault("n_discarded", series.n_discarded)
    total = series.n_used + series.n_discarded
    meta.setdefault("discard_fraction", series.n_discarded / total if total else 0.0)
    for key, val in meta.items():
        lines.append(f"# {key}: {val}")
    lines.append("t,re_c,im_c")
    for t, c in zip(series.times, series.values):
        lines.append(f"{float(t):.17g},{float(c.real):.17g},{float(c.imag):.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_correlation_csv(path) -> CorrelationSeries:
    """Read a series written by write_correlation_csv."""
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if ":" in line:
                    key, _, val = line[1:].partition(":")
                    meta[key.strip()] = val.strip()
                continue
            if line.startswith("t,"):
                continue
            t, re, im = line.split(",")
            rows.append((float(t), float(re), float(im)))
    data = np.array(rows)
    return CorrelationSeries(
        times=data[:, 0],
        values=data[:, 1] + 1j * data[:, 2],
        n_used=int(meta.get("n_used", 0)),
        n_discarded=int(meta.get("n_discarded", 0)),
        seed=int(meta.get("seed", 0)),
    )
