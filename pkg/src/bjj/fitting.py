"""Joint least-squares fit of phase and imbalance time series.

The model is the damped elliptic pendulum of :mod:`bjj.pendulum` with three
technical offsets: a phase offset, an imbalance offset and a time shift
between the two channels. Following the experimental analysis, the imbalance
channel is linearly interpolated and shifted by ``-time_shift`` before it is
compared with the model, and the fit runs on per-hold-time means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.optimize import least_squares
from scipy.signal import lombscargle

from .core import Channel, Dataset, PendulumParams, TwoModeParams, angular_to_hz, wrap_phase
from .elliptic import complete_K
from .pendulum import eval_imbalance, eval_phase, first_peak_imbalance, pendulum_to_two_mode

PARAM_NAMES = (
    "phase_amplitude",
    "imbalance_amplitude",
    "frequency",
    "decay_time",
    "sn_shift",
    "phase_offset",
    "imbalance_offset",
    "time_shift",
)

# keys mirror the columns of the published fit table
REPORT_KEYS = {
    "phase_amplitude": ("Φ₀ [rad]", 1.0),
    "imbalance_amplitude": ("N₀", 1.0),
    "decay_time": ("τ [ms]", 1e3),
    "frequency": ("ω [rad/s]", 1.0),
    "time_shift": ("dt [ms]", 1e3),
    "imbalance_offset": ("n̄", 1.0),
    "phase_offset": ("φ̄ [rad]", 1.0),
    "sn_shift": ("φ′ [rad]", 1.0),
}
TWO_MODE_KEYS = {
    "interaction": ("U/h [Hz]", 1.0 / (2.0 * math.pi)),
    "tunneling": ("J/h [Hz]", 1.0 / (2.0 * math.pi)),
    "viscosity": ("η", 1.0),
    "detuning": ("ε/h [Hz]", 1.0 / (2.0 * math.pi)),
}


class GuessError(ValueError):
    pass


class ShiftError(ValueError):
    pass


@dataclass(frozen=True)
class FitOptions:
    """Settings of :func:`fit_joint`.

    ``fixed`` maps parameter names to values held constant, e.g.
    ``{"imbalance_amplitude": 0.16}`` for a constrained amplitude.
    ``shift_mode`` is ``"interpolate"`` (shift the measured imbalance channel)
    or ``"model"`` (evaluate the model at ``t + time_shift`` instead).
    ``balance_channels`` rescales each channel by its own residual RMS after a
    first pass and re-polishes, so the phase channel (rad) and the imbalance
    channel (dimensionless) enter with comparable weight.
    """

    weighted: bool = False
    balance_channels: bool = False
    fixed: dict = field(default_factory=dict)
    max_time_shift: float = 3e-3
    shift_mode: str = "interpolate"
    n_phase_starts: int = 8
    frequency_factors: tuple = (1.0, 0.9, 1.1)
    max_iter: int = 500
    xtol: float = 1e-10
    ftol: float = 1e-12
    decay_time_cap: float = 10.0
    fallback_imbalance_amplitude: float = 0.1
    explore_nfev: int = 40

    def __post_init__(self):
        unknown = set(self.fixed) - set(PARAM_NAMES)
        if unknown:
            raise ValueError(f"unknown fixed parameters: {sorted(unknown)}")
        if self.shift_mode not in ("interpolate", "model"):
            raise ValueError(f"shift_mode must be 'interpolate' or 'model', got {self.shift_mode!r}")


@dataclass(frozen=True)
class FitProblem:
    atom_number: int
    phase: Channel
    imbalance: Channel | None = None
    options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        for name, ch in (("phase", self.phase), ("imbalance", self.imbalance)):
            if ch is None:
                continue
            if len(ch) < 5:
                raise ValueError(f"{name} channel needs at least 5 hold times, got {len(ch)}")
            if np.any(np.asarray(ch.times) < 0):
                raise ValueError(f"{name} channel has negative hold times")

    @classmethod
    def from_dataset(cls, ds: Dataset, options: FitOptions | None = None) -> "FitProblem":
        options = options or FitOptions()
        phase = ds.phase_channel()
        imb = ds.imbalance_channel()
        return cls(ds.atom_number, phase, imb if len(imb) else None, options)

    @property
    def phase_only(self) -> bool:
        return self.imbalance is None


def shift_imbalance(series: Channel, dt: float) -> Channel:
    """Imbalance channel shifted later by ``dt``.

    The result is sampled on the original hold times ``t`` with value
    ``series(t - dt)`` (linear interpolation). Hold times whose source time
    falls outside the measured range are dropped rather than extrapolated.
    """
    t = np.asarray(series.times, dtype=float)
    span = t[-1] - t[0]
    if abs(dt) >= 0.5 * span:
        raise ShiftError(f"|dt| = {abs(dt):.4g} s must be below half the channel span {span:.4g} s")
    src = t - dt
    tol = 1e-12 * max(1.0, span)
    keep = (src >= t[0] - tol) & (src <= t[-1] + tol)
    if keep.sum() < 2:
        raise ShiftError("fewer than two points survive the shift")
    src = np.clip(src[keep], t[0], t[-1])
    return Channel(t[keep], np.interp(src, t, series.values), np.interp(src, t, series.sem))


@dataclass(frozen=True)
class FitReport:
    pendulum: PendulumParams
    derived: TwoModeParams
    ci95: dict
    residual_rms: dict
    iterations: int
    converged: bool
    free: tuple
    covariance: np.ndarray | None = None
    flags: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def atom_number(self) -> int:
        return self.derived.atom_number

    def to_dict(self) -> dict:
        pend = self.pendulum.to_dict()
        table = {REPORT_KEYS[k][0]: v * REPORT_KEYS[k][1] for k, v in pend.items()}
        two = self.derived.to_dict()
        table.update({TWO_MODE_KEYS[k][0]: two[k] * TWO_MODE_KEYS[k][1] for k in TWO_MODE_KEYS})
        ci_table = {REPORT_KEYS[k][0]: (None if v is None else v * REPORT_KEYS[k][1]) for k, v in self.ci95.items()}
        errs = propagate_errors(self)
        if errs.available:
            ci_table.update({TWO_MODE_KEYS[k][0]: v * TWO_MODE_KEYS[k][1] for k, v in errs.ci95.items()})
        return {
            "atom_number": self.atom_number,
            "table": table,
            "ci95": ci_table,
            "pendulum": pend,
            "two_mode": two,
            "ci95_raw": dict(self.ci95),
            "residual_rms": dict(self.residual_rms),
            "iterations": self.iterations,
            "converged": self.converged,
            "free": list(self.free),
            "covariance": None if self.covariance is None else self.covariance.tolist(),
            "flags": list(self.flags),
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        cov = d.get("covariance")
        return cls(
            pendulum=PendulumParams.from_dict(d["pendulum"]),
            derived=TwoModeParams.from_dict(d["two_mode"]),
            ci95=dict(d["ci95_raw"]),
            residual_rms=dict(d["residual_rms"]),
            iterations=int(d["iterations"]),
            converged=bool(d["converged"]),
            free=tuple(d["free"]),
            covariance=None if cov is None else np.array(cov, dtype=float),
            flags=tuple(d.get("flags", ())),
            diagnostics=dict(d.get("diagnostics", {})),
        )


def _extrema_envelope(t, y, omega):
    """Largest |y| in each half period, as (times, magnitudes)."""
    half = math.pi / omega
    bins = np.floor((t - t[0]) / half).astype(int)
    times, mags = [], []
    for b in np.unique(bins):
        sel = np.where(bins == b)[0]
        i = sel[np.argmax(np.abs(y[sel]))]
        times.append(t[i])
        mags.append(abs(y[i]))
    return np.array(times), np.array(mags)


def initial_guess(problem: FitProblem) -> PendulumParams:
    """Starting point for the fit from simple signal features.

    Frequency from the Lomb-Scargle peak of the phase channel, decay time from
    the logarithmic decrement of half-period extrema, amplitudes from the first
    extrema, offsets from the channel means and zero time shift. ``sn_shift``
    is left at ``K`` and explored by the multi-start in :func:`fit_joint`.
    """
    opts = problem.options
    t = np.asarray(problem.phase.times, dtype=float)
    y = np.asarray(problem.phase.values, dtype=float)
    phase_offset = float(y.mean())
    yc = y - phase_offset
    if np.std(yc) <= 1e-12 * max(1.0, abs(phase_offset)):
        raise GuessError("phase channel is constant; no oscillation to seed the fit, supply a manual guess")

    span = t[-1] - t[0]
    step = np.min(np.diff(t))
    freqs = np.linspace(0.5 * 2.0 * math.pi / span, math.pi / step, 4000)
    power = lombscargle(t, yc, freqs, normalize=True)
    i = int(np.argmax(power))
    if power[i] < 5.0 * np.median(power):
        raise GuessError("no spectral peak above noise in the phase channel; supply a manual guess")
    if 0 < i < freqs.size - 1:
        a, b, c = power[i - 1], power[i], power[i + 1]
        denom = a - 2 * b + c
        offset = 0.5 * (a - c) / denom if denom != 0 else 0.0
        omega_obs = freqs[i] + offset * (freqs[1] - freqs[0])
    else:
        omega_obs = freqs[i]

    times, mags = _extrema_envelope(t, yc, omega_obs)
    keep = mags >= 0.2 * mags[0]
    cut = np.argmin(keep) if not keep.all() else keep.size
    tau = opts.decay_time_cap
    if cut >= 2:
        slope = np.polyfit(times[:cut], np.log(mags[:cut]), 1)[0]
        if slope < -1.0 / opts.decay_time_cap:
            tau = min(max(-1.0 / slope, 3.0 / omega_obs), opts.decay_time_cap)
    phase_amp = float(np.clip(mags[0] * math.exp((times[0] - t[0]) / tau), 0.05, 3.0))
    # spectral peak sits at the anharmonic frequency pi w / (2 K)
    omega = omega_obs * 2.0 * complete_K(math.sin(0.5 * phase_amp)) / math.pi

    if problem.imbalance is not None:
        tn = np.asarray(problem.imbalance.times, dtype=float)
        yn = np.asarray(problem.imbalance.values, dtype=float)
        n_offset = float(yn.mean())
        first = tn <= tn[0] + 2.0 * math.pi / omega_obs
        j = int(np.argmax(np.abs(yn[first] - n_offset)))
        n_amp = abs(yn[first][j] - n_offset) * math.exp((tn[first][j] - tn[0]) / tau)
        n_amp = float(np.clip(n_amp, 1e-3, 0.9))
    else:
        n_offset = 0.0
        n_amp = opts.fallback_imbalance_amplitude
    guess = PendulumParams(
        phase_amplitude=phase_amp,
        imbalance_amplitude=n_amp,
        frequency=float(omega),
        decay_time=float(tau),
        sn_shift=complete_K(math.sin(0.5 * phase_amp)),
        phase_offset=phase_offset,
        imbalance_offset=n_offset,
        time_shift=0.0,
    )
    return guess.replace(**{k: v for k, v in opts.fixed.items()})


class _Objective:
    """Residual vector over the free parameters of a fit problem."""

    def __init__(self, problem: FitProblem, fixed: dict):
        self.problem = problem
        self.opts = problem.options
        self.fixed = dict(fixed)
        self.free = tuple(n for n in PARAM_NAMES if n not in self.fixed)
        self.channel_scale = (1.0, 1.0)
        ph = problem.phase
        self.tp = np.asarray(ph.times, dtype=float)
        self.yp = np.asarray(ph.values, dtype=float)
        self.wp = self._weights(ph.sem) if self.opts.weighted else np.ones_like(self.yp)
        self.imb = problem.imbalance
        if self.imb is not None:
            tn = np.asarray(self.imb.times, dtype=float)
            if self.opts.shift_mode == "interpolate":
                if "time_shift" in self.fixed:
                    lo = hi = self.fixed["time_shift"]
                else:
                    lo, hi = -self.opts.max_time_shift, self.opts.max_time_shift
                # evaluation times valid for every admissible shift
                tol = 1e-12 * max(1.0, tn[-1])
                self.tn_eval = tn[(tn >= tn[0] + hi - tol) & (tn <= tn[-1] + lo + tol)]
                if self.tn_eval.size < 5:
                    raise ShiftError("too few imbalance points survive the admissible time-shift range")
            else:
                self.tn_eval = tn
            self.yn = np.asarray(self.imb.values, dtype=float)

    @staticmethod
    def _weights(sem):
        sem = np.asarray(sem, dtype=float)
        pos = sem[sem > 0]
        floor = 1e-3 * np.median(pos) if pos.size else 1.0
        return 1.0 / np.maximum(sem, floor)

    def params(self, x) -> PendulumParams:
        values = dict(self.fixed)
        values.update(zip(self.free, (float(v) for v in x)))
        return PendulumParams(**values)

    def vector(self, pp: PendulumParams) -> np.ndarray:
        return np.array([getattr(pp, n) for n in self.free], dtype=float)

    def channel_residuals(self, pp: PendulumParams):
        rp = wrap_phase(eval_phase(self.tp, pp) - self.yp)
        if self.imb is None:
            return rp, np.empty(0)
        if self.opts.shift_mode == "interpolate":
            shifted = _shift_on(self.imb, self.tn_eval, pp.time_shift)
            rn = eval_imbalance(self.tn_eval, pp) - shifted.values
            wn = self._weights(shifted.sem) if self.opts.weighted else 1.0
        else:
            rn = eval_imbalance(self.tn_eval + pp.time_shift, pp) - self.yn
            wn = self._weights(self.imb.sem) if self.opts.weighted else 1.0
        return rp, rn * wn if self.opts.weighted else rn

    def __call__(self, x):
        pp = self.params(x)
        rp, rn = self.channel_residuals(pp)
        sp, sn = self.channel_scale
        return np.concatenate([rp * self.wp / sp, rn / sn])

    def bounds(self):
        eps = 1e-6
        table = {
            "phase_amplitude": (eps, math.pi - eps),
            "imbalance_amplitude": (eps, 1.0 - eps),
            "frequency": (eps, np.inf),
            "decay_time": (eps, self.opts.decay_time_cap),
            "sn_shift": (-np.inf, np.inf),
            "phase_offset": (-np.inf, np.inf),
            "imbalance_offset": (-1.0, 1.0),
            "time_shift": (-self.opts.max_time_shift, self.opts.max_time_shift),
        }
        lo = np.array([table[n][0] for n in self.free])
        hi = np.array([table[n][1] for n in self.free])
        return lo, hi

    def scales(self, pp: PendulumParams):
        table = {
            "phase_amplitude": 1.0,
            "imbalance_amplitude": 0.1,
            "frequency": pp.frequency,
            "decay_time": min(pp.decay_time, 1.0),
            "sn_shift": 1.0,
            "phase_offset": 1.0,
            "imbalance_offset": 0.01,
            "time_shift": 1e-3,
        }
        return np.array([table[n] for n in self.free])


def _shift_on(series: Channel, eval_times, dt):
    t = np.asarray(series.times, dtype=float)
    src = np.clip(eval_times - dt, t[0], t[-1])
    return Channel(eval_times, np.interp(src, t, series.values), np.interp(src, t, series.sem))


def _clip_into(x, lo, hi):
    span = np.where(np.isfinite(hi - lo), hi - lo, 1.0)
    return np.clip(x, lo + 1e-9 * span, hi - 1e-9 * span)


def fit_joint(problem: FitProblem, guess: PendulumParams | None = None) -> FitReport:
    """Fit both channels with the damped pendulum model.

    Runs a short trust-region fit from the guess and from every combination of
    ``options.n_phase_starts`` values of ``sn_shift`` spread over one period
    ``[0, 4K)`` and the frequency factors, then polishes the best candidate.
    95% intervals come from the finite-difference Jacobian at the optimum.
    """
    opts = problem.options
    flags = []
    fixed = dict(opts.fixed)
    if problem.phase_only:
        fixed.setdefault("time_shift", 0.0)
        fixed.setdefault("imbalance_amplitude", opts.fallback_imbalance_amplitude)
        fixed.setdefault("imbalance_offset", 0.0)
        flags.append("phase_only: no imbalance channel, time_shift fixed to 0 and imbalance_amplitude constrained")
    if guess is None:
        guess = initial_guess(FitProblem(problem.atom_number, problem.phase, problem.imbalance,
                                         FitOptions(**{**_asdict(opts), "fixed": fixed})))
    guess = guess.replace(**fixed)
    obj = _Objective(problem, fixed)
    lo, hi = obj.bounds()
    scale = obj.scales(guess)

    # the guess itself always competes, so a good manual seed is never discarded
    starts = [_clip_into(obj.vector(guess), lo, hi)]
    quarter = complete_K(guess.modulus)
    for factor in opts.frequency_factors:
        for j in range(opts.n_phase_starts):
            start = guess.replace(frequency=guess.frequency * factor,
                                  sn_shift=4.0 * quarter * j / opts.n_phase_starts)
            starts.append(_clip_into(obj.vector(start), lo, hi))
    if "sn_shift" in fixed:
        starts = [_clip_into(obj.vector(guess), lo, hi)]

    best = None
    for x0 in starts:
        r = least_squares(obj, x0, bounds=(lo, hi), x_scale=scale, method="trf",
                          max_nfev=opts.explore_nfev, xtol=1e-8, ftol=1e-10)
        if best is None or r.cost < best.cost:
            best = r
    res = least_squares(obj, _clip_into(best.x, lo, hi), bounds=(lo, hi), x_scale=scale, method="trf",
                        max_nfev=opts.max_iter, xtol=opts.xtol, ftol=opts.ftol, gtol=1e-15)
    if opts.balance_channels and not problem.phase_only:
        rp, rn = obj.channel_residuals(obj.params(res.x))
        sp = float(np.sqrt(np.mean((rp * obj.wp) ** 2)))
        sn = float(np.sqrt(np.mean(rn**2)))
        if sp > 0 and sn > 0:
            obj.channel_scale = (sp, sn)
            res = least_squares(obj, res.x, bounds=(lo, hi), x_scale=scale, method="trf",
                                max_nfev=opts.max_iter, xtol=opts.xtol, ftol=opts.ftol, gtol=1e-15)
    converged = bool(res.status > 0)
    if not converged:
        flags.append(f"not converged: {res.message}")

    pp = obj.params(res.x)
    m, p = res.fun.size, res.x.size
    cov = None
    ci = {n: None for n in PARAM_NAMES}
    if m > p:
        cov = _channel_covariance(res.jac, res.fun, obj.tp.size, p)
        if cov is None:
            flags.append("covariance singular: confidence intervals unavailable")
        else:
            q = stats.t.ppf(0.975, m - p)
            for name, var in zip(obj.free, np.diag(cov)):
                ci[name] = float(q * math.sqrt(max(var, 0.0)))
    else:
        flags.append("no degrees of freedom: confidence intervals unavailable")

    rp, rn = obj.channel_residuals(pp)
    rms = {"phase": float(np.sqrt(np.mean(rp**2)))}
    if rn.size:
        rms["imbalance"] = float(np.sqrt(np.mean(rn**2)))
    derived = pendulum_to_two_mode(pp, problem.atom_number)
    diagnostics = {
        "cost": float(res.cost),
        "n_starts": len(starts),
        "shift_mode": opts.shift_mode,
        "interpolation": "linear" if opts.shift_mode == "interpolate" else "none",
        "weighted": opts.weighted,
        "channel_scale": list(obj.channel_scale),
        "first_peak_imbalance": first_peak_imbalance(pp),
        "fixed": dict(fixed),
    }
    return FitReport(pp, derived, ci, rms, int(res.nfev), converged, obj.free, cov, tuple(flags), diagnostics)


def _channel_covariance(jac, fun, n_phase, n_free):
    """Sandwich covariance with a separate residual variance per channel.

    The two channels carry different units and noise levels, so a single
    pooled variance would misstate both. Each channel's variance uses its share
    ``n_free * m_c / m`` of the lost degrees of freedom.
    """
    m = fun.size
    jtj = jac.T @ jac
    if np.linalg.cond(jtj) > 1e15:
        return None
    var = np.empty(m)
    for sl in (slice(0, n_phase), slice(n_phase, m)):
        mc = sl.stop - sl.start
        if mc:
            dof = max(mc - n_free * mc / m, 1.0)
            var[sl] = np.sum(fun[sl] ** 2) / dof
    try:
        bread = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return None
    meat = jac.T @ (var[:, None] * jac)
    cov = bread @ meat @ bread
    return 0.5 * (cov + cov.T)


def _asdict(opts: FitOptions) -> dict:
    return {f: getattr(opts, f) for f in opts.__dataclass_fields__}


def objective_residuals(problem: FitProblem, pp: PendulumParams, fixed: dict | None = None) -> np.ndarray:
    """Residual vector the optimizer minimizes, at parameters ``pp``."""
    fixed = dict(problem.options.fixed if fixed is None else fixed)
    obj = _Objective(problem, fixed)
    return obj(obj.vector(pp))


def channel_tables(problem: FitProblem, pp: PendulumParams, fixed: dict | None = None) -> dict:
    """Per-channel columns ``(t, data, model, residual)`` at parameters ``pp``.

    In interpolate mode the imbalance rows are the shifted (interpolated) data
    on the fit's evaluation times.
    """
    obj = _Objective(problem, dict(problem.options.fixed if fixed is None else fixed))
    model = eval_phase(obj.tp, pp)
    out = {"phase": np.column_stack([obj.tp, obj.yp, model, wrap_phase(model - obj.yp)])}
    if obj.imb is not None:
        if problem.options.shift_mode == "interpolate":
            data = _shift_on(obj.imb, obj.tn_eval, pp.time_shift).values
            model = eval_imbalance(obj.tn_eval, pp)
        else:
            data = obj.yn
            model = eval_imbalance(obj.tn_eval + pp.time_shift, pp)
        out["imbalance"] = np.column_stack([obj.tn_eval, data, model, model - data])
    return out


@dataclass(frozen=True)
class PropagatedErrors:
    sigma: dict
    ci95: dict
    available: bool


_PROPAGATED = ("interaction", "tunneling", "viscosity", "detuning")


def two_mode_gradient(pp: PendulumParams, atom_number: int) -> dict:
    """Partial derivatives of (U, J, eta, eps) with respect to the pendulum parameters."""
    two = pendulum_to_two_mode(pp, atom_number)
    s = pp.modulus
    dlns = 0.5 * math.cos(0.5 * pp.phase_amplitude) / s  # d ln(s) / d Phi0
    n0, w = pp.imbalance_amplitude, pp.frequency
    u, j, eta, eps = two.interaction, two.tunneling, two.viscosity, two.detuning
    inv_tau = 0.0 if pp.is_undamped else 1.0 / pp.decay_time
    zero = dict.fromkeys(PARAM_NAMES, 0.0)
    return {
        "tunneling": {**zero, "phase_amplitude": -j * dlns, "imbalance_amplitude": j / n0, "frequency": j / w},
        "interaction": {**zero, "phase_amplitude": u * dlns, "imbalance_amplitude": -u / n0, "frequency": u / w},
        "viscosity": {**zero, "phase_amplitude": -eta * dlns, "imbalance_amplitude": eta / n0,
                      "frequency": -eta / w, "decay_time": -eta * inv_tau},
        "detuning": {**zero, "phase_amplitude": eps * dlns, "imbalance_amplitude": -eps / n0,
                     "frequency": eps / w, "imbalance_offset": -2.0 * w * s / n0},
    }


def propagate_errors(report: FitReport) -> PropagatedErrors:
    """First-order propagation of the full parameter covariance to (U, J, eta, eps).

    Values are in the internal units (rad/s for U, J, eps). ``ci95`` uses the
    same Student-t factor as the fit intervals.
    """
    if report.covariance is None:
        none = dict.fromkeys(_PROPAGATED)
        return PropagatedErrors(none, dict(none), False)
    grads = two_mode_gradient(report.pendulum, report.atom_number)
    cov = np.asarray(report.covariance, dtype=float)
    sigma, ci = {}, {}
    ratio = _t_ratio(report)
    for name in _PROPAGATED:
        g = np.array([grads[name][p] for p in report.free])
        var = float(g @ cov @ g)
        sigma[name] = math.sqrt(max(var, 0.0))
        ci[name] = sigma[name] * ratio
    return PropagatedErrors(sigma, ci, True)


def _t_ratio(report: FitReport) -> float:
    """Ratio ci95 / sigma used by the fit, recovered from any free parameter."""
    cov = report.covariance
    for i, name in enumerate(report.free):
        c = report.ci95.get(name)
        if c is not None and cov[i, i] > 0:
            return c / math.sqrt(cov[i, i])
    return float(stats.norm.ppf(0.975))


@dataclass(frozen=True)
class PowerLawFit:
    """``tau = alpha * N**beta`` fitted on log-transformed data."""

    alpha: float
    beta: float
    alpha_ci: tuple
    beta_ci: tuple
    n_points: int

    def __call__(self, n):
        return self.alpha * np.asarray(n, dtype=float) ** self.beta

    def to_dict(self) -> dict:
        return {
            "alpha_s": self.alpha,
            "beta": self.beta,
            "alpha_ci95_s": list(self.alpha_ci),
            "beta_ci95": list(self.beta_ci),
            "n_points": self.n_points,
        }


def power_law_fit(points) -> PowerLawFit:
    """Least squares of ``ln tau`` on ``ln N`` with Student-t 95% intervals.

    ``points`` is a sequence of ``(N, tau)`` with tau in seconds. The interval
    on ``alpha`` is the exponentiated interval of the log intercept.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be a sequence of (N, tau) pairs")
    if arr.shape[0] < 3:
        raise ValueError(f"power-law fit needs at least 3 points, got {arr.shape[0]}")
    bad = np.where(~(arr > 0).all(axis=1))[0]
    if bad.size:
        raise ValueError(f"row {int(bad[0])} has a non-positive value: {arr[bad[0]].tolist()}")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    n = x.size
    design = np.column_stack([np.ones(n), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = n - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(design.T @ design)
    q = stats.t.ppf(0.975, dof) if dof > 0 else math.inf
    half = q * np.sqrt(np.diag(cov))
    return PowerLawFit(
        alpha=float(math.exp(coef[0])),
        beta=float(coef[1]),
        alpha_ci=(float(math.exp(coef[0] - half[0])), float(math.exp(coef[0] + half[0]))),
        beta_ci=(float(coef[1] - half[1]), float(coef[1] + half[1])),
        n_points=n,
    )


def report_summary(report: FitReport) -> str:
    pp, two = report.pendulum, report.derived
    return (
        f"Phi0={pp.phase_amplitude:.3f} rad N0={pp.imbalance_amplitude:.3f} "
        f"tau={pp.decay_time * 1e3:.2f} ms omega={pp.frequency:.1f} rad/s dt={pp.time_shift * 1e3:.3f} ms "
        f"U/h={angular_to_hz(two.interaction):.3f} Hz J/h={angular_to_hz(two.tunneling):.2f} Hz "
        f"eta={two.viscosity:.1f}"
    )
