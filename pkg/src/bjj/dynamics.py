"""Mean-field two-mode equations of motion, with optional viscous damping.

State is ``(n, phi)``: normalized imbalance and relative phase. With
``hbar = 1`` and energies in rad/s::

    dn/dt   = -2J sqrt(1 - n^2) sin(phi) - (eta / N) dphi/dt
    dphi/dt =  N U n + 2J n / sqrt(1 - n^2) cos(phi) + eps

The damping term is only present when ``damped`` is true.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from .core import JunctionState, TwoModeParams, Trajectory

SINGULARITY_GUARD = 1e-9
RTOL = 1e-12
ATOL = 1e-12


class SingularityError(ArithmeticError):
    pass


class IntegrationError(RuntimeError):
    def __init__(self, message, last_time):
        super().__init__(f"{message} (last valid time {last_time:.6g} s)")
        self.last_time = last_time


class RegimeLabel(str, Enum):
    JOSEPHSON_OSCILLATION = "josephson_oscillation"
    SELF_TRAPPED = "self_trapped"


def _check_imbalance(n):
    if abs(n) > 1.0 - SINGULARITY_GUARD:
        raise SingularityError(f"|n| = {abs(n)!r} exceeds 1 - {SINGULARITY_GUARD:g}; the equations of motion are singular")


def _vector_field(n, phi, p: TwoModeParams, damped: bool):
    if not abs(n) < 1.0:
        # trial stages outside the physical domain; nan forces step rejection
        return math.nan, math.nan
    root = math.sqrt((1.0 - n) * (1.0 + n))
    phi_dot = p.atom_number * p.interaction * n + 2.0 * p.tunneling * n / root * math.cos(phi) + p.detuning
    n_dot = -2.0 * p.tunneling * root * math.sin(phi)
    if damped:
        n_dot -= p.viscosity / p.atom_number * phi_dot
    return n_dot, phi_dot


def rhs(s: JunctionState, p: TwoModeParams, damped: bool = True):
    """Return ``(dn/dt, dphi/dt)`` at state ``s``."""
    _check_imbalance(s.imbalance)
    return _vector_field(s.imbalance, s.phase, p, damped)


def energy(s: JunctionState, p: TwoModeParams) -> float:
    """Mean-field energy per hbar, ``(NU/2) n^2 - 2J sqrt(1-n^2) cos(phi)``.

    Conserved by the undamped, undetuned flow.
    """
    return float(energy_array(s.imbalance, s.phase, p))


def energy_array(n, phi, p: TwoModeParams):
    n = np.asarray(n, dtype=float)
    if np.any(np.abs(n) >= 1):
        raise ValueError("energy is defined for |n| < 1 only")
    phi = np.asarray(phi, dtype=float)
    return 0.5 * p.atom_number * p.interaction * n**2 - 2.0 * p.tunneling * np.sqrt(1.0 - n**2) * np.cos(phi)


def separatrix_lhs(s: JunctionState, p: TwoModeParams) -> float:
    """Left-hand side of the oscillation criterion, ``(NU/4J) n^2 - sqrt(1-n^2) cos(phi)``."""
    if p.tunneling <= 0:
        raise ValueError("regime classification requires tunneling > 0")
    n = s.imbalance
    return p.atom_number * p.interaction / (4.0 * p.tunneling) * n * n - math.sqrt(1.0 - n * n) * math.cos(s.phase)


def classify_regime(init: JunctionState, p: TwoModeParams) -> RegimeLabel:
    if separatrix_lhs(init, p) <= 1.0:
        return RegimeLabel.JOSEPHSON_OSCILLATION
    return RegimeLabel.SELF_TRAPPED


def plasma_frequency(p: TwoModeParams) -> float:
    """Small-oscillation frequency ``sqrt(N U 2J)`` in rad/s (``NU >> 2J`` form)."""
    if p.tunneling <= 0:
        raise ValueError("plasma frequency requires tunneling > 0")
    return math.sqrt(p.atom_number * p.interaction * 2.0 * p.tunneling)


def damped_frequency(plasma: float, decay_time: float) -> float:
    """Return ``sqrt(w_p^2 - 1/tau^2)``; raises for critically or over-damped input."""
    if math.isinf(decay_time):
        return float(plasma)
    if plasma * decay_time <= 1.0:
        raise ValueError(f"overdamped: w_p * tau = {plasma * decay_time:.6g} <= 1")
    return math.sqrt(plasma * plasma - 1.0 / (decay_time * decay_time))


@dataclass(frozen=True)
class IntegrationStats:
    nfev: int
    energy_drift: float
    message: str


def integrate(p: TwoModeParams, init: JunctionState, t_grid, *, damped: bool = True, rtol=RTOL, atol=ATOL,
              return_stats: bool = False):
    """Integrate the equations of motion and sample them on ``t_grid``.

    Uses an adaptive 8(5,3) Runge-Kutta pair (DOP853). The run aborts when
    ``|n|`` reaches ``1 - SINGULARITY_GUARD`` instead of clamping.

    Returns
    -------
    Trajectory, or ``(Trajectory, IntegrationStats)`` when ``return_stats``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a non-empty 1-D array")
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    _check_imbalance(init.imbalance)

    def f(_t, y):
        return _vector_field(y[0], y[1], p, damped)

    def wall(_t, y):
        return (1.0 - SINGULARITY_GUARD) - abs(y[0])

    wall.terminal = True

    y0 = [init.imbalance, init.phase]
    if t_grid.size == 1:
        traj = Trajectory(t_grid, np.array([init.imbalance]), np.array([init.phase]))
        stats = IntegrationStats(0, 0.0, "trivial grid")
        return (traj, stats) if return_stats else traj

    sol = solve_ivp(f, (0.0, t_grid[-1]), y0, method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol,
                    events=wall)
    if sol.status == 1:
        raise IntegrationError("imbalance reached the singularity guard", float(sol.t_events[0][0]))
    if sol.status != 0:
        last = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"integration failed: {sol.message}", last)

    traj = Trajectory(sol.t, sol.y[0], sol.y[1])
    if not return_stats:
        return traj
    h = energy_array(traj.imbalance, traj.phase, p)
    # relative to |H(0)|, floored at the tunneling energy since H(0) can vanish
    scale = max(abs(h[0]), 2.0 * p.tunneling) or 1.0
    drift = float(np.max(np.abs(h - h[0])) / scale)
    return traj, IntegrationStats(int(sol.nfev), drift, str(sol.message))
