"""Closed-form damped pendulum model and its map to two-mode parameters.

The phase follows a rigid-pendulum solution whose elliptic modulus decays
exponentially::

    k(t)   = sin(Phi0/2) exp(-t/tau)
    phi(t) = 2 arcsin[k(t) sn(w t + s, k(t))] + phi_bar
    n(t)   = N0 / (2 w sin(Phi0/2)) dphi/dt + n_bar

The map to the two-mode model uses ``w ~ w_p`` and ``tau = 2 / (U eta)``::

    J   = w N0 / (4 sin(Phi0/2))
    U   = 2 w sin(Phi0/2) / (N N0)
    eta = N N0 / (tau w sin(Phi0/2))
    eps = -n_bar w 2 sin(Phi0/2) / N0
"""

from __future__ import annotations

import math

import numpy as np

from .core import JunctionState, PendulumParams, TwoModeParams
from .dynamics import plasma_frequency
from .elliptic import complete_K, jacobi_sn

HARMONIC_THRESHOLD = 1e-4
DERIVATIVE_STEP = 1e-3  # in units of 1/frequency


class DegenerateAmplitudeError(ValueError):
    pass


class AmplitudeOverflowError(ValueError):
    pass


def decay_time(interaction: float, viscosity: float) -> float:
    """Damping time ``2 / (U eta)`` (hbar = 1); ``inf`` for zero viscosity."""
    if viscosity == 0:
        return math.inf
    return 2.0 / (interaction * viscosity)


def _envelope(t, pp: PendulumParams):
    if pp.is_undamped:
        return np.ones_like(t)
    return np.exp(-t / pp.decay_time)


def _phase_core(t, pp: PendulumParams):
    """Oscillating part of the phase, without ``phase_offset``."""
    t = np.asarray(t, dtype=float)
    env = _envelope(t, pp)
    arg = pp.frequency * t + pp.sn_shift
    if pp.phase_amplitude < HARMONIC_THRESHOLD:
        return pp.phase_amplitude * env * np.sin(arg)
    # for t < 0 the envelope grows; keep the modulus inside the domain
    k = np.minimum(pp.modulus * env, 1.0 - 1e-15)
    return 2.0 * np.arcsin(k * jacobi_sn(arg, k))


def eval_phase(t, pp: PendulumParams):
    """Model relative phase at times ``t`` (s)."""
    out = _phase_core(t, pp) + pp.phase_offset
    return float(out) if np.ndim(out) == 0 else out


def phase_rate(t, pp: PendulumParams):
    """Time derivative of the model phase.

    Central difference with step ``1e-3 / frequency`` and one Richardson
    extrapolation level; exact closed form in the harmonic limit.
    """
    t = np.asarray(t, dtype=float)
    if pp.phase_amplitude < HARMONIC_THRESHOLD:
        env = _envelope(t, pp)
        arg = pp.frequency * t + pp.sn_shift
        damping = 0.0 if pp.is_undamped else 1.0 / pp.decay_time
        return pp.phase_amplitude * env * (pp.frequency * np.cos(arg) - damping * np.sin(arg))
    h = DERIVATIVE_STEP / pp.frequency
    # one vectorized call for the four stencil points
    stencil = _phase_core(t[..., None] + np.array([h, -h, 0.5 * h, -0.5 * h]), pp)
    d_h = (stencil[..., 0] - stencil[..., 1]) / (2.0 * h)
    d_half = (stencil[..., 2] - stencil[..., 3]) / h
    return (4.0 * d_half - d_h) / 3.0


def eval_imbalance(t, pp: PendulumParams):
    """Model normalized imbalance at times ``t`` (s)."""
    rate = phase_rate(t, pp)
    if pp.phase_amplitude < HARMONIC_THRESHOLD:
        # 2 sin(Phi0/2) -> Phi0, already divided out of the closed form
        out = pp.imbalance_amplitude / (pp.frequency * pp.phase_amplitude) * rate
    else:
        out = pp.imbalance_amplitude / (2.0 * pp.frequency * pp.modulus) * rate
    out = out + pp.imbalance_offset
    return float(out) if np.ndim(out) == 0 else out


def model_state(t: float, pp: PendulumParams) -> JunctionState:
    return JunctionState(eval_imbalance(t, pp), eval_phase(t, pp))


def oscillation_period(pp: PendulumParams) -> float:
    """Undamped period ``4 K(sin(Phi0/2)) / frequency`` at the initial amplitude."""
    return 4.0 * complete_K(pp.modulus) / pp.frequency


def first_peak_imbalance(pp: PendulumParams, samples: int = 4001) -> float:
    """Largest ``|n - n_bar|`` reached during the first oscillation period.

    Equals ``imbalance_amplitude`` for an undamped pendulum; differs once damping
    is present.
    """
    t = np.linspace(0.0, oscillation_period(pp), samples)
    return float(np.max(np.abs(eval_imbalance(t, pp) - pp.imbalance_offset)))


def pendulum_to_two_mode(pp: PendulumParams, atom_number: int) -> TwoModeParams:
    s = pp.modulus
    n0 = pp.imbalance_amplitude
    w = pp.frequency
    if n0 == 0 or s == 0:
        raise DegenerateAmplitudeError("phase and imbalance amplitudes must be non-zero")
    tunneling = w * n0 / (4.0 * s)
    interaction = 2.0 * w * s / (atom_number * n0)
    viscosity = 0.0 if pp.is_undamped else atom_number * n0 / (pp.decay_time * w * s)
    detuning = -pp.imbalance_offset * w * 2.0 * s / n0
    return TwoModeParams(atom_number, interaction, tunneling, viscosity, detuning)


def two_mode_to_pendulum(p: TwoModeParams, phase_amplitude: float) -> PendulumParams:
    """Pendulum parameters for given two-mode parameters and phase amplitude.

    ``frequency`` is the plasma frequency, the oscillation starts at its phase
    extremum (``sn_shift = K``) and the phase offset is zero. Zero viscosity
    gives ``decay_time = inf``.
    """
    if not 0 < phase_amplitude < math.pi:
        raise ValueError(f"phase amplitude must lie in (0, pi), got {phase_amplitude}")
    s = math.sin(0.5 * phase_amplitude)
    w = plasma_frequency(p)
    n0 = 4.0 * p.tunneling * s / w
    if n0 >= 1:
        raise AmplitudeOverflowError(f"imbalance amplitude {n0:.4g} >= 1 is outside the model's validity")
    n_bar = -p.detuning / w * n0 / (2.0 * s)
    return PendulumParams(
        phase_amplitude=phase_amplitude,
        imbalance_amplitude=n0,
        frequency=w,
        decay_time=decay_time(p.interaction, p.viscosity),
        sn_shift=complete_K(s),
        phase_offset=0.0,
        imbalance_offset=n_bar,
        time_shift=0.0,
    )


def matched_pendulum(p: TwoModeParams, phase_amplitude: float) -> PendulumParams:
    """Pendulum parameters matched to the exact linearization of the damped flow.

    Unlike :func:`two_mode_to_pendulum` this keeps the ``2J`` correction to the
    phase stiffness ``a = NU + 2J``::

        w0^2 = 2J a,  1/tau = a eta / (2N),  w = sqrt(w0^2 - 1/tau^2),  N0 = 2 w s / a

    Use it to compare the closed form against direct integration.
    """
    s = math.sin(0.5 * phase_amplitude)
    a = p.atom_number * p.interaction + 2.0 * p.tunneling
    w0_sq = 2.0 * p.tunneling * a
    rate = a * p.viscosity / (2.0 * p.atom_number)
    if rate * rate >= w0_sq:
        raise ValueError("overdamped parameters")
    w = math.sqrt(w0_sq - rate * rate)
    return PendulumParams(
        phase_amplitude=phase_amplitude,
        imbalance_amplitude=2.0 * w * s / a,
        frequency=w,
        decay_time=math.inf if rate == 0 else 1.0 / rate,
        sn_shift=complete_K(s),
        imbalance_offset=-p.detuning / a,
    )


def n0_bound(p: TwoModeParams) -> float:
    """Upper bound ``2 sqrt(2J / NU)`` on the imbalance amplitude for ``NU >> 2J``."""
    return 2.0 * math.sqrt(2.0 * p.tunneling / (p.atom_number * p.interaction))
