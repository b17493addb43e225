"""Independent reference implementations used only by the tests."""

import math

import mpmath
import numpy as np
from scipy.integrate import solve_ivp


def sn_ode(u, k):
    """sn(u, k) by integrating sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn from u = 0."""
    if u == 0:
        return 0.0

    def f(_u, y):
        s, c, d = y
        return [c * d, -s * d, -k * k * s * c]

    sol = solve_ivp(f, (0.0, u), [0.0, 1.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-15)
    return float(sol.y[0, -1])


def K_agm_mp(k, digits=25):
    """K(k) from a hand-written AGM loop in 25-digit arithmetic."""
    with mpmath.workdps(digits):
        a = mpmath.mpf(1)
        b = mpmath.sqrt(1 - mpmath.mpf(k) ** 2)
        while abs(a - b) > mpmath.mpf(10) ** (-digits + 3):
            a, b = (a + b) / 2, mpmath.sqrt(a * b)
        return float(mpmath.pi / (2 * a))


def wrapped_normal_resultant(sigma):
    return math.exp(-0.5 * sigma * sigma)


def damped_harmonic(t, amplitude, omega, decay_time, phase=0.0):
    """Linear-response oracle ``A exp(-t/tau) cos(omega t + phase)``."""
    return amplitude * np.exp(-np.asarray(t) / decay_time) * np.cos(omega * np.asarray(t) + phase)


# Published fit table rows: (scan, N, dt_ms, n_bar, Phi0, N0, N0_constrained, tau_ms, omega,
#                            U/h, dU, J/h, dJ, eta, deta, eps/h, deps)
TABLE = [
    ("150216_22", 3400, 0.5, 0.032, 1.14, 0.16, True, 9.0, 2697, 0.86, 0.09, 32, 3, 41, 5, 93, 18),
    ("150216_6667", 3200, 0.9, -0.016, 1.24, 0.13, True, 9.9, 2394, 0.86, 0.13, 21, 3, 37, 6, 54, 24),
    ("150216_24", 3400, 1.0, -0.025, 1.59, 0.12, False, 7.9, 1626, 0.94, 0.19, 11, 2, 43, 8, 79, 27),
    ("150216_6165", 3200, 1.1, -0.009, 1.32, 0.11, False, 9.8, 1248, 0.71, 0.15, 8, 2, 46, 10, 14, 13),
    ("150216_23", 3300, 1.8, -0.007, 1.53, 0.07, True, 7.6, 607, 0.68, 0.32, 2, 1, 62, 30, 16, 19),
    ("150306_380", 4500, 1.3, 0.008, 1.89, 0.12, True, 7.9, 1337, 0.67, 0.25, 8, 3, 61, 23, -24, 24),
    ("150304_170", 2500, 1.5, 0.036, 1.49, 0.12, False, 9.0, 965, 0.71, 0.11, 7, 1, 50, 8, -65, 12),
    ("150304_1730", 1700, 1.5, 0.048, 1.58, 0.14, False, 11.8, 761, 0.72, 0.12, 6, 1, 37, 7, -58, 15),
    ("150304_1760", 1250, 1.1, 0.055, 1.26, 0.14, False, 15.1, 701, 0.76, 0.11, 7, 1, 28, 4, -52, 10),
    ("150307_4701", 750, 1.5, -0.003, 0.66, 0.09, False, 15.5, 548, 0.80, 0.20, 6, 2, 26, 7, 2, 4),
    ("150307_4700", 750, 1.7, 0.001, 1.30, 0.17, True, 13.7, 554, 0.86, 0.13, 6, 1, 27, 4, -1, 5),
    ("150307_4710", 750, 1.6, -0.002, 1.77, 0.19, True, 15.4, 502, 0.88, 0.30, 5, 2, 23, 8, 1, 15),
]

# (N, tau) pairs of the decay-time scaling plot
SCALING_POINTS = [(4500, 7.9e-3), (3200, 9.8e-3), (2500, 9.0e-3), (1700, 11.8e-3), (1250, 15.1e-3), (750, 15.5e-3)]
