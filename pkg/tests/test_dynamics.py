"""Integrator checks: symplecticity, analytic oscillator limits, monodromy
against finite differences and the exact linear-flow exponential."""

import numpy as np
import pytest
from scipy.linalg import expm

from dotspec.dynamics import (
    IntegratorConfig,
    initial_state,
    monodromy_check,
    propagate,
    step,
)
from dotspec.model import (
    SYMPLECTIC_J,
    DotParameters,
    PhasePoint,
    hamiltonian,
    hessian,
)


def symplectic_defect(m):
    return np.max(np.abs(m.T @ SYMPLECTIC_J @ m - SYMPLECTIC_J))


def run_steps(point, params, dt, n):
    state = initial_state(point, params)
    for _ in range(n):
        state = step(state, params, dt)
    return state


def test_zero_steps_identity():
    params = DotParameters()
    pt = PhasePoint(q=[1.5, 0.0], p=[0.0, 0.5])
    final, discarded = propagate(pt, params, IntegratorConfig(dt=1e-3, n_steps=0))
    assert not discarded
    assert final.action == 0.0
    np.testing.assert_array_equal(final.monodromy, np.eye(4))
    np.testing.assert_array_equal(final.point.q, pt.q)


def test_harmonic_period_return():
    # kappa = 0, omegaL = 0: pure oscillator returns after 2 pi / omega0;
    # dt ~ 1e-3 tuned so n steps make up exactly one period
    params = DotParameters(omega0=1.0, omegaL=0.0, kappa=0.0)
    n = 6283
    dt = 2 * np.pi / n
    final = run_steps(PhasePoint(q=[1.0, 0.0], p=[0.0, 0.0]), params, dt, n)
    np.testing.assert_allclose(final.point.q, [1.0, 0.0], atol=1e-5)
    np.testing.assert_allclose(final.point.p, [0.0, 0.0], atol=1e-5)


def test_oscillator_monodromy_position_block():
    params = DotParameters(omega0=1.0, omegaL=0.0, kappa=0.0)
    dt = 2e-4
    n = 5000  # t = 1.0
    final = run_steps(PhasePoint(q=[0.3, -0.2], p=[0.1, 0.4]), params, dt, n)
    t = n * dt
    np.testing.assert_allclose(final.monodromy[2:, 2:], np.cos(t) * np.eye(2),
                               atol=1e-5)
    np.testing.assert_allclose(final.monodromy[0:2, 0:2], np.cos(t) * np.eye(2),
                               atol=1e-5)


def test_monodromy_matches_exact_linear_flow_with_field():
    # kappa = 0: the flow is linear, M(t) = expm(-J H t) exactly
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=0.0)
    hess = hessian(PhasePoint(q=[0.0, 0.0], p=[0.0, 0.0]), params)
    t = 10.0
    dt = 1e-3
    exact = expm(-SYMPLECTIC_J @ hess * t)
    final = run_steps(PhasePoint(q=[0.9, -0.1], p=[0.2, -1.1]), params, dt,
                      round(t / dt))
    assert np.max(np.abs(final.monodromy - exact)) < 1e-5


def test_single_step_symplectic_to_roundoff():
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    state = initial_state(PhasePoint(q=[1.3, 0.4], p=[-0.2, 0.6]), params)
    new = step(state, params, 2e-3)
    assert symplectic_defect(new.monodromy) < 1e-10


def test_long_run_symplectic():
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    state = initial_state(PhasePoint(q=[1.5, 0.0], p=[0.0, 0.5]), params)
    for i in range(100_000):  # t = 200
        state = step(state, params, 2e-3)
    assert symplectic_defect(state.monodromy) < 1e-6


def test_equilibrium_point_stays_fixed():
    # gradient vanishes at q=(1,0), p=(0,-1); the splitting keeps the point
    # fixed up to O(dt^2), so a small step pins it to 1e-10 over 1e4 steps
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    final = run_steps(PhasePoint(q=[1.0, 0.0], p=[0.0, -1.0]), params, 1e-6, 10_000)
    assert np.max(np.abs(final.point.q - [1.0, 0.0])) < 1e-10
    assert np.max(np.abs(final.point.p - [0.0, -1.0])) < 1e-10


def test_energy_conservation_coulomb():
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    pt = PhasePoint(q=[1.5, 0.0], p=[0.0, 0.5])
    e0 = hamiltonian(pt, params)
    final, discarded = propagate(pt, params,
                                 IntegratorConfig(dt=1e-3, n_steps=100_000))
    assert not discarded
    e1 = hamiltonian(final.point, params)
    assert abs(e1 - e0) / abs(e0) < 1e-6


def test_energy_drift_second_order_in_dt():
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    pt = PhasePoint(q=[1.4, 0.2], p=[0.1, 0.6])
    e0 = hamiltonian(pt, params)

    def max_drift(dt, t_total=5.0):
        state = initial_state(pt, params)
        worst = 0.0
        for _ in range(round(t_total / dt)):
            state = step(state, params, dt)
            worst = max(worst, abs(float(hamiltonian(state.point, params)) - e0))
        return worst

    d1 = max_drift(4e-3)
    d2 = max_drift(2e-3)
    assert d1 / d2 == pytest.approx(4.0, rel=0.35)


def test_action_matches_analytic_oscillator():
    # q = cos t, p = -sin t: S(t) = -sin(2 t) / 4
    params = DotParameters(omega0=1.0, omegaL=0.0, kappa=0.0)
    dt = 1e-4
    quarter = run_steps(PhasePoint(q=[1.0, 0.0], p=[0.0, 0.0]), params, dt,
                        round(np.pi / 4 / dt))
    t = round(np.pi / 4 / dt) * dt
    assert quarter.action == pytest.approx(-np.sin(2 * t) / 4, abs=1e-5)
    period = run_steps(PhasePoint(q=[1.0, 0.0], p=[0.0, 0.0]), params, dt,
                       round(2 * np.pi / dt))
    assert period.action == pytest.approx(0.0, abs=1e-5)


def test_monodromy_check_linear_flow():
    params = DotParameters(omega0=1.0, omegaL=0.7, kappa=0.0)
    cfg = IntegratorConfig(dt=2e-3, n_steps=5000)  # t = 10
    dev = monodromy_check(PhasePoint(q=[0.8, 0.1], p=[-0.3, 0.5]), params, cfg)
    assert dev < 1e-6


def test_monodromy_check_coulomb():
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    cfg = IntegratorConfig(dt=2e-3, n_steps=5000)  # t = 10, regular orbit
    dev = monodromy_check(PhasePoint(q=[1.5, 0.0], p=[0.0, 0.5]), params, cfg,
                          eps=1e-6)
    assert dev < 1e-4


def test_monodromy_check_zero_time():
    # identity up to the rounding of x +/- eps in the finite differences
    params = DotParameters()
    cfg = IntegratorConfig(dt=1e-3, n_steps=0)
    dev = monodromy_check(PhasePoint(q=[1.2, 0.0], p=[0.0, 0.3]), params, cfg)
    assert dev < 1e-10


def test_discard_on_energy_violation():
    # a grossly oversized step breaks energy conservation
    params = DotParameters(omega0=1.0, omegaL=1.0, kappa=1.0)
    pt = PhasePoint(q=[0.4, 0.0], p=[0.0, 2.0])
    _, discarded = propagate(pt, params,
                             IntegratorConfig(dt=0.5, n_steps=200, energy_tol=1e-6))
    assert discarded


def test_discard_on_origin_floor():
    params = DotParameters(omega0=1.0, omegaL=0.0, kappa=1.0)
    # inbound trajectory dips below an artificially large floor
    pt = PhasePoint(q=[2.0, 0.0], p=[-3.0, 0.0])
    _, discarded = propagate(
        pt, params,
        IntegratorConfig(dt=1e-3, n_steps=5000, origin_floor=0.5))
    assert discarded


def test_observer_called_every_step():
    params = DotParameters()
    seen = []
    propagate(PhasePoint(q=[1.2, 0.0], p=[0.0, 0.4]), params,
              IntegratorConfig(dt=1e-3, n_steps=17), observer=seen.append)
    assert len(seen) == 17
    assert seen[-1].t == pytest.approx(17e-3)
