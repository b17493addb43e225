"""Power-law fit of decay time against atom number, with a sampled curve."""

import argparse
import json

import numpy as np

from bjj.fitting import power_law_fit

POINTS = [(4500, 7.9e-3), (3200, 9.8e-3), (2500, 9.0e-3), (1700, 11.8e-3), (1250, 15.1e-3), (750, 15.5e-3)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reports", nargs="*", default=[], help="fit_report.json files to add as points")
    args = ap.parse_args()
    points = list(POINTS)
    for path in args.reports:
        with open(path, encoding="utf-8") as fh:
            rep = json.load(fh)
        points.append((rep["atom_number"], rep["pendulum"]["decay_time"]))
    fit = power_law_fit(points)
    print(f"alpha = {fit.alpha:.3f} s  [{fit.alpha_ci[0]:.3f}, {fit.alpha_ci[1]:.3f}]")
    print(f"beta  = {fit.beta:.3f}    [{fit.beta_ci[0]:.3f}, {fit.beta_ci[1]:.3f}]")
    for n, tau in points:
        print(f"  N={n:5d}  tau={tau * 1e3:5.1f} ms  model={fit(n) * 1e3:5.1f} ms")
    grid = np.geomspace(500, 5000, 7)
    print("curve:", ", ".join(f"{n:.0f}:{t * 1e3:.1f}" for n, t in zip(grid, fit(grid))))


if __name__ == "__main__":
    main()
