"""Simulation and parameter estimation for a bosonic Josephson junction."""

__version__ = "0.1.0"

from .core import (Channel, Dataset, HoldGroup, JunctionState, PendulumParams, Trajectory, TwoModeParams,
                   angular_to_hz, hz_to_angular, wrap_phase)
from .dynamics import classify_regime, damped_frequency, energy, integrate, plasma_frequency, rhs
from .elliptic import complete_K, jacobi_sn
from .fitting import FitOptions, FitProblem, FitReport, fit_joint, power_law_fit, propagate_errors
from .pendulum import eval_imbalance, eval_phase, pendulum_to_two_mode, two_mode_to_pendulum

__all__ = [
    "Channel", "Dataset", "HoldGroup", "JunctionState", "PendulumParams", "Trajectory", "TwoModeParams",
    "angular_to_hz", "hz_to_angular", "wrap_phase", "classify_regime", "damped_frequency", "energy",
    "integrate", "plasma_frequency", "rhs", "complete_K", "jacobi_sn", "FitOptions", "FitProblem",
    "FitReport", "fit_joint", "power_law_fit", "propagate_errors", "eval_imbalance", "eval_phase",
    "pendulum_to_two_mode", "two_mode_to_pendulum",
]
