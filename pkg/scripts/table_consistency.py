"""Map each published pendulum fit to two-mode parameters and compare.

For every row, (Phi0, N0, omega, tau, N) goes through the pendulum-to-two-mode
map and the result is set against the listed U/h, J/h, eta and eps/h with
their quoted uncertainties. Rows whose N0 was held fixed during the original
fit are marked.
"""

import math

from bjj.core import PendulumParams, TwoModeParams, angular_to_hz
from bjj.dynamics import plasma_frequency
from bjj.pendulum import pendulum_to_two_mode

# scan, N, dt [ms], n_bar, Phi0, N0, N0 fixed, tau [ms], omega [rad/s],
# U/h, dU, J/h, dJ, eta, d_eta, eps/h, d_eps
ROWS = [
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


def mark(value, ref, err):
    return f"{value:8.3g}{'' if abs(value - ref) <= err else '*':1}"


def main():
    print(f"{'scan':12s} {'fixed':5s} {'U/h':>9s} {'J/h':>9s} {'eta':>9s} {'eps/h':>9s} {'w_p/w':>7s}")
    for scan, n, _dt, n_bar, phi0, n0, fixed, tau, w, u, du, j, dj, eta, deta, eps, deps in ROWS:
        pp = PendulumParams(phi0, n0, w, tau * 1e-3, imbalance_offset=n_bar)
        two = pendulum_to_two_mode(pp, n)
        wp = plasma_frequency(TwoModeParams.from_hz(n, u, j))
        print(f"{scan:12s} {'yes' if fixed else 'no':5s} "
              f"{mark(angular_to_hz(two.interaction), u, du)} {mark(angular_to_hz(two.tunneling), j, dj)} "
              f"{mark(two.viscosity, eta, deta)} {mark(angular_to_hz(two.detuning), eps, deps)} "
              f"{wp / w:7.3f}")
    print("* outside the quoted uncertainty; w_p/w uses the listed U/h and J/h")
    assert math.isfinite(wp)


if __name__ == "__main__":
    main()
