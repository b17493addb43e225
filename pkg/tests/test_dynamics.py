import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import curve_fit

from bjj.core import JunctionState, TwoModeParams
from bjj.dynamics import (IntegrationError, RegimeLabel, SingularityError, classify_regime, damped_frequency, energy,
                          energy_array, integrate, plasma_frequency, rhs, separatrix_lhs)
from bjj.pendulum import decay_time, two_mode_to_pendulum

J8 = 2 * math.pi * 8


def damped_params(viscosity=None):
    p = TwoModeParams.from_hz(3300, 0.71, 8.0)
    eta = 2.0 / (p.interaction * 9.8e-3) if viscosity is None else viscosity
    return TwoModeParams(p.atom_number, p.interaction, p.tunneling, eta)


def test_rhs_fixed_point():
    p = TwoModeParams.from_hz(3200, 0.71, 8.0, 46.0)
    assert rhs(JunctionState(0.0, 0.0), p, damped=False) == (0.0, 0.0)


def test_rhs_tunneling_current():
    p = TwoModeParams(3200, 2 * math.pi * 0.71, J8, 46.0)
    n_dot, phi_dot = rhs(JunctionState(0.0, math.pi / 2), p, damped=False)
    assert n_dot == pytest.approx(-100.53, abs=5e-3)
    assert phi_dot == pytest.approx(0.0, abs=1e-12)
    n_dot_damped, _ = rhs(JunctionState(0.0, math.pi / 2), p, damped=True)
    assert n_dot_damped == pytest.approx(-2 * J8, rel=1e-12)


def test_rhs_damping_term():
    p = TwoModeParams(3200, 2.0, 10.0, 46.0)
    s = JunctionState(0.01, 0.3)
    n0, phi0 = rhs(s, p, damped=False)
    n1, phi1 = rhs(s, p, damped=True)
    assert phi1 == phi0
    assert n1 - n0 == pytest.approx(-(46.0 / 3200) * phi0, rel=1e-12)


def test_rhs_singularity_names_value():
    p = TwoModeParams(10, 1.0, 1.0)
    with pytest.raises(SingularityError, match="0.9999999999"):
        rhs(JunctionState(0.9999999999, 0.0), p)


def test_pure_detuning_accumulates_phase():
    eps = 2 * math.pi * 50
    p = TwoModeParams(100, 1.0, 0.0, 0.0, eps)
    t = np.linspace(0, 0.02, 21)
    traj = integrate(p, JunctionState(0.0, 0.0), t)
    np.testing.assert_allclose(traj.phase, eps * t, atol=1e-10)
    np.testing.assert_allclose(traj.imbalance, 0.0, atol=1e-14)


@given(st.floats(-2.5, 2.5), st.floats(-0.05, 0.05))
@settings(max_examples=12)
def test_undamped_energy_drift(phi0, n0):
    p = damped_params(0.0)
    t = np.linspace(0.0, 0.1, 201)
    _, stats = integrate(p, JunctionState(n0, phi0), t, damped=False, return_stats=True)
    assert stats.energy_drift < 1e-8


def test_undamped_energy_drift_small_amplitude():
    p = damped_params(0.0)
    traj, stats = integrate(p, JunctionState(0.0, 0.1), np.linspace(0, 0.1, 1001), return_stats=True)
    h = energy_array(traj.imbalance, traj.phase, p)
    assert np.max(np.abs(h - h[0])) / abs(h[0]) < 1e-8
    assert stats.energy_drift < 1e-8


def test_damped_energy_non_increasing():
    p = damped_params()
    traj = integrate(p, JunctionState(0.0, -1.3), np.linspace(0, 0.06, 6001))
    h = energy_array(traj.imbalance, traj.phase, p)
    assert np.max(np.diff(h)) <= 1e-10 * max(1.0, abs(h[0]))
    assert h[-1] < h[0]


def test_damped_trajectory_spirals_to_origin():
    p = damped_params()
    t = np.linspace(0, 0.06, 6001)
    traj = integrate(p, JunctionState(0.0, -1.3), t)
    assert abs(traj.phase[-1]) < 0.05 and abs(traj.imbalance[-1]) < 1e-3
    # amplitude envelope of the phase over successive 10 ms windows decays on a ~10 ms scale
    amp = [np.max(np.abs(traj.phase[(t >= a) & (t < a + 0.01)])) for a in (0.01, 0.02, 0.03, 0.04)]
    rates = -np.diff(np.log(amp)) / 0.01
    assert np.all(rates > 0)
    assert 1 / np.mean(rates) == pytest.approx(9.8e-3, rel=0.3)


def test_small_amplitude_frequency_matches_plasma_frequency():
    # NU/2J ~ 1200 so that the 2J correction to the frequency is below 0.05%
    p = TwoModeParams.from_hz(3300, 0.71, 1.0)
    w_p = plasma_frequency(p)
    t = np.linspace(0, 0.1, 4001)
    traj = integrate(p, JunctionState(0.0, 0.05), t, damped=False)
    (a, w, ph), _ = curve_fit(lambda t, a, w, ph: a * np.cos(w * t + ph), t, traj.phase, p0=[0.05, w_p, 0.0])
    assert w == pytest.approx(w_p, rel=1e-3)


def test_small_amplitude_frequency_exact_linearization():
    p = TwoModeParams.from_hz(3200, 0.71, 8.0)
    exact = math.sqrt(2 * p.tunneling * (p.atom_number * p.interaction + 2 * p.tunneling))
    t = np.linspace(0, 0.05, 4001)
    traj = integrate(p, JunctionState(0.0, 0.01), t, damped=False)
    (a, w, ph), _ = curve_fit(lambda t, a, w, ph: a * np.cos(w * t + ph), t, traj.phase,
                              p0=[0.01, plasma_frequency(p), 0.0])
    assert w == pytest.approx(exact, rel=2e-5)


def test_time_reversal():
    p = damped_params(0.0)
    t = np.linspace(0, 0.05, 11)
    start = JunctionState(0.02, -1.0)
    fwd = integrate(p, start, t, damped=False)
    back = integrate(p, JunctionState(-fwd.imbalance[-1], fwd.phase[-1]), t, damped=False)
    assert -back.imbalance[-1] == pytest.approx(start.imbalance, abs=1e-8)
    assert back.phase[-1] == pytest.approx(start.phase, abs=1e-8)


@pytest.mark.parametrize("damped", [False, True])
def test_mirror_symmetry(damped):
    p = damped_params()
    t = np.linspace(0, 0.03, 301)
    a = integrate(p, JunctionState(0.01, 0.8), t, damped=damped)
    b = integrate(p, JunctionState(-0.01, -0.8), t, damped=damped)
    assert np.max(np.abs(a.imbalance + b.imbalance)) < 1e-9
    assert np.max(np.abs(a.phase + b.phase)) < 1e-9


def test_integrate_grid_validation():
    p = damped_params()
    with pytest.raises(ValueError, match="start at 0"):
        integrate(p, JunctionState(0, 0.1), [0.1, 0.2])
    with pytest.raises(ValueError):
        integrate(p, JunctionState(0, 0.1), [0.0, 0.2, 0.1])
    one = integrate(p, JunctionState(0, 0.1), [0.0])
    assert len(one) == 1


def test_integrate_rejects_singular_start():
    with pytest.raises(SingularityError):
        integrate(damped_params(), JunctionState(1.0, 0.0), [0.0, 1e-3])


def test_integration_error_reports_last_time():
    # tunneling-dominated flow from n = 0.99, phi = pi/2 drives n to -1
    p = TwoModeParams(10, 1e-9, 1.0)
    with pytest.raises(IntegrationError) as info:
        integrate(p, JunctionState(0.99, math.pi / 2), np.linspace(0, 5.0, 11), damped=False)
    assert 0 < info.value.last_time < 5.0


@given(st.floats(-math.pi, math.pi))
def test_zero_imbalance_always_oscillates(phi0):
    p = TwoModeParams.from_hz(3200, 0.71, 8.0)
    assert classify_regime(JunctionState(0.0, phi0), p) is RegimeLabel.JOSEPHSON_OSCILLATION


def test_self_trapped_example():
    # NU/4J = 100
    p = TwoModeParams(100, 8.0, 2.0)
    s = JunctionState(0.5, math.pi)
    assert separatrix_lhs(s, p) == pytest.approx(25 + math.sqrt(0.75), rel=1e-12)
    assert classify_regime(s, p) is RegimeLabel.SELF_TRAPPED


def test_boundary_is_inclusive():
    p = TwoModeParams(100, 8.0, 2.0)
    assert separatrix_lhs(JunctionState(0.0, math.pi), p) == 1.0
    assert classify_regime(JunctionState(0.0, math.pi), p) is RegimeLabel.JOSEPHSON_OSCILLATION


def test_classification_needs_tunneling():
    with pytest.raises(ValueError):
        classify_regime(JunctionState(0.0, 0.0), TwoModeParams(100, 1.0, 0.0))


def test_self_trapped_state_stays_trapped():
    p = TwoModeParams(100, 8.0, 2.0)
    traj = integrate(p, JunctionState(0.5, math.pi), np.linspace(0, 2.0, 2001), damped=False)
    assert np.all(traj.imbalance > 0)


def test_plasma_frequency_rows():
    # direct arithmetic sqrt(N U 2J) with U, J given as h-frequencies
    row_6165 = plasma_frequency(TwoModeParams.from_hz(3200, 0.71, 8.0))
    row_22 = plasma_frequency(TwoModeParams.from_hz(3400, 0.86, 32.0))
    assert row_6165 == pytest.approx(2 * math.pi * math.sqrt(3200 * 0.71 * 16), rel=1e-14)
    assert row_22 == pytest.approx(2 * math.pi * math.sqrt(3400 * 0.86 * 64), rel=1e-14)
    assert row_6165 == pytest.approx(1199, rel=2e-3)
    assert row_22 == pytest.approx(2722, rel=2e-3)


def test_plasma_frequency_two_atoms():
    # N U = 2J gives omega_p = 2J
    p = TwoModeParams(2, 3.0, 3.0)
    assert plasma_frequency(p) == pytest.approx(6.0, rel=1e-15)


def test_damped_frequency():
    assert damped_frequency(1248.0, 9.8e-3) == pytest.approx(1243.82, abs=0.01)
    assert damped_frequency(1248.0, math.inf) == 1248.0
    with pytest.raises(ValueError, match="overdamped"):
        damped_frequency(100.0, 0.01)


def test_energy_examples():
    p = TwoModeParams.from_hz(3200, 0.71, 8.0)
    assert energy(JunctionState(0.0, math.pi / 2), p) == pytest.approx(0.0, abs=1e-12)
    assert energy(JunctionState(0.0, 0.0), p) == pytest.approx(-2 * p.tunneling, rel=1e-15)
    with pytest.raises(ValueError):
        energy(JunctionState(1.0, 0.0), p)


@given(st.floats(-0.99, 0.99), st.floats(-10, 10))
def test_energy_is_scaled_oscillation_criterion(n, phi):
    p = TwoModeParams.from_hz(3200, 0.71, 8.0)
    s = JunctionState(n, phi)
    assert energy(s, p) / (2 * p.tunneling) == pytest.approx(separatrix_lhs(s, p), rel=1e-12, abs=1e-12)


def test_detuning_sign_matches_imbalance_offset():
    # the damped flow relaxes to n = -eps / (NU + 2J); the pendulum map predicts -eps / (NU)
    p = TwoModeParams.from_hz(3200, 0.71, 8.0, 46.0, 14.0)
    traj = integrate(p, JunctionState(0.0, -1.0), np.linspace(0, 0.2, 201))
    n_bar = two_mode_to_pendulum(p, 1.32).imbalance_offset
    assert n_bar < 0 and traj.imbalance[-1] < 0
    assert traj.imbalance[-1] == pytest.approx(n_bar, rel=2 * p.tunneling / (p.atom_number * p.interaction) + 1e-3)


def test_decay_time_from_viscosity():
    p = damped_params()
    assert decay_time(p.interaction, p.viscosity) == pytest.approx(9.8e-3, rel=1e-12)
