"""Monte Carlo of the synth-then-fit estimator at the 6165 operating point.

Draws ``--reps`` datasets (6 shots per hold time, 0.5 ms steps to 40 ms,
sigma_phi = 0.1 rad, sigma_n = 0.01, dt = 0.75 ms), fits each with default
options and reports bias, spread and the rate of fits within the acceptance
tolerances (Phi0 and omega 3%, tau 8%, dt 0.15 ms). Fits run in parallel
processes; each repetition has its own named random stream.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from bjj.core import PendulumParams
from bjj.elliptic import complete_K
from bjj.fitting import FitOptions, FitProblem, fit_joint
from bjj.measurement import synth_dataset
from bjj.rng import substream

TRUTH = PendulumParams(1.32, 0.11, 1248.0, 9.8e-3, phase_offset=0.2, imbalance_offset=-0.009, time_shift=0.75e-3)
TRUTH = TRUTH.replace(sn_shift=3.0 * complete_K(TRUTH.modulus))
HOLD = np.round(np.arange(0.0, 40.0001e-3, 0.5e-3), 12)
NAMES = ("phase_amplitude", "frequency", "decay_time", "time_shift")


def one(job):
    seed, i, balance = job
    ds = synth_dataset(TRUTH, 3200, HOLD, 6, phase_noise=0.1, imbalance_noise=0.01,
                       rng=substream(seed, "roundtrip_mc", str(i)))
    est = fit_joint(FitProblem.from_dataset(ds, FitOptions(balance_channels=balance))).pendulum
    return [getattr(est, n) for n in NAMES]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--balance-channels", action="store_true")
    args = ap.parse_args()

    jobs = [(args.seed, i, args.balance_channels) for i in range(args.reps)]
    with ProcessPoolExecutor(args.workers) as pool:
        est = np.array(list(pool.map(one, jobs, chunksize=4)))
    truth = np.array([getattr(TRUTH, n) for n in NAMES])
    tol = np.array([0.03 * truth[0], 0.03 * truth[1], 0.08 * truth[2], 0.15e-3])
    inside = np.abs(est - truth) <= tol
    for k, name in enumerate(NAMES):
        rel_bias = (est[:, k].mean() - truth[k]) / truth[k]
        rel_std = est[:, k].std(ddof=1) / truth[k]
        print(f"{name:16s} bias {rel_bias:+.2%}  spread {rel_std:.2%}  within tolerance {inside[:, k].mean():.1%}")
    rate = inside.all(axis=1).mean()
    print(f"all four within tolerance: {rate:.1%} of {args.reps}")
    # chance that 20 independent repetitions give at least 18 successes
    from scipy.stats import binom
    print(f"P(>= 18 of 20) at this rate: {binom.sf(17, 20, rate):.2f}")


if __name__ == "__main__":
    main()
