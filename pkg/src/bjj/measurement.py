"""Synthetic measurement records and the readout pipeline.

Covers the interference-fringe model ``rho(x) = g(x) [1 + C cos(k0 (x - x0) + phi)]``
with a Gaussian envelope ``g``, Fourier-sideband phase readout, envelope centre
estimation, circular statistics, number squeezing and phase diffusion, plus
generation of shot datasets from the pendulum model.

Spatial quantities are in micrometres by default; nothing depends on that
choice as long as ``x``, widths and wave numbers are consistent.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .core import Dataset, HoldGroup, PendulumParams, wrap_phase
from .pendulum import eval_imbalance, eval_phase

PIXEL_PITCH = 4.0  # um, imaging resolution in object space
FRINGE_PERIOD = 130.0  # um
ENVELOPE_WIDTH = 120.0  # um, Gaussian sigma
N_PIXELS = 256
SNR_THRESHOLD = 3.0


class LowContrastWarning(UserWarning):
    pass


class DegenerateEnsembleWarning(UserWarning):
    pass


class NonMonotonicDiffusionWarning(UserWarning):
    pass


class EnvelopeFitError(RuntimeError):
    pass


def pixel_grid(n_pixels: int = N_PIXELS, pitch: float = PIXEL_PITCH, center: float = 0.0) -> np.ndarray:
    """Uniform pixel centres symmetric about ``center``."""
    return center + pitch * (np.arange(n_pixels) - 0.5 * (n_pixels - 1))


@dataclass(frozen=True)
class FringeModel:
    center: float = 0.0
    width: float = ENVELOPE_WIDTH
    amplitude: float = 1.0
    contrast: float = 0.56
    wavenumber: float = 2.0 * math.pi / FRINGE_PERIOD
    phase: float = 0.0

    def __post_init__(self):
        if not 0 <= self.contrast <= 1:
            raise ValueError(f"contrast must lie in [0, 1] to keep the density non-negative, got {self.contrast}")
        if self.width <= 0 or self.amplitude < 0 or self.wavenumber <= 0:
            raise ValueError("width and wavenumber must be positive, amplitude non-negative")
        if self.wavenumber * self.width < 3:
            warnings.warn(
                f"k0 * sigma = {self.wavenumber * self.width:.2f}; sidebands overlap the envelope peak",
                LowContrastWarning,
                stacklevel=2,
            )

    def density(self, x):
        x = np.asarray(x, dtype=float)
        g = self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2)
        return g * (1.0 + self.contrast * np.cos(self.wavenumber * (x - self.center) + self.phase))


@dataclass(frozen=True)
class ShotNoise:
    """Poisson counting noise for a picture holding ``atoms`` atoms on average."""

    atoms: float = 2500.0
    read_noise: float = 0.0


@dataclass(frozen=True, eq=False)
class FringeProfile:
    x: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if x.shape != rho.shape or x.ndim != 1 or x.size < 4:
            raise ValueError("x and rho must be 1-D arrays of equal length (>= 4)")
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("pixel grid must be uniform and increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "rho", rho)

    @property
    def pitch(self) -> float:
        return float(self.x[1] - self.x[0])

    def to_csv(self) -> str:
        lines = ["x,rho"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(self.x, self.rho)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "FringeProfile":
        rows = [r.split(",") for r in text.strip().splitlines()]
        if [c.strip() for c in rows[0]] != ["x", "rho"]:
            raise ValueError("profile CSV must start with header 'x,rho'")
        arr = np.array([[float(a), float(b)] for a, b in rows[1:]])
        return cls(arr[:, 0], arr[:, 1])


@dataclass(frozen=True, eq=False)
class FringeImage:
    """2-D fringe picture, ``rho[iz, ix]``; rows run along the long axis ``z``."""

    x: np.ndarray
    z: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        z = np.asarray(self.z, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if rho.shape != (z.size, x.size):
            raise ValueError(f"rho must have shape (len(z), len(x)) = {(z.size, x.size)}, got {rho.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "rho", rho)

    def to_csv(self) -> str:
        dz = float(self.z[1] - self.z[0]) if self.z.size > 1 else 0.0
        head = (f"# nz={self.z.size},nx={self.x.size},x0={float(self.x[0])!r},dx={float(self.x[1] - self.x[0])!r},"
                f"z0={float(self.z[0])!r},dz={dz!r}")
        rows = [",".join(repr(float(v)) for v in row) for row in self.rho]
        return "\n".join([head] + rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "FringeImage":
        lines = text.strip().splitlines()
        meta = dict(item.split("=") for item in lines[0].lstrip("# ").split(","))
        nz, nx = int(meta["nz"]), int(meta["nx"])
        x = float(meta["x0"]) + float(meta["dx"]) * np.arange(nx)
        z = float(meta["z0"]) + float(meta["dz"]) * np.arange(nz)
        rho = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        return cls(x, z, rho)


def _poisson(mean, noise: ShotNoise, rng: np.random.Generator):
    total = mean.sum()
    scale = noise.atoms / total if total > 0 else 0.0
    counts = rng.poisson(mean * scale).astype(float)
    if noise.read_noise > 0:
        counts = counts + rng.normal(0.0, noise.read_noise, size=counts.shape)
    return counts


def synth_profile(model: FringeModel, x=None, noise: ShotNoise | None = None,
                  rng: np.random.Generator | None = None) -> FringeProfile:
    """Evaluate the fringe model on a pixel grid, optionally with counting noise.

    With noise the profile is in detected counts, scaled so that the expected
    total equals ``noise.atoms``; ``rng`` is then required.
    """
    if x is None:
        x = pixel_grid(center=model.center)
    x = np.asarray(x, dtype=float)
    rho = model.density(x)
    if noise is not None:
        if rng is None:
            raise ValueError("a seeded random generator is required for noisy profiles")
        rho = _poisson(rho, noise, rng)
    return FringeProfile(x, rho)


def _transform(x, rho, ks, x0):
    """Hann-windowed DFT of the mean-subtracted profile, referenced to ``x0``."""
    n = x.size
    window = np.hanning(n + 2)[1:-1]
    y = (rho - rho.mean()) * window
    dx = x[1] - x[0]
    return np.exp(-1j * np.outer(ks, x - x0)) @ y * dx


@dataclass(frozen=True)
class SidebandReading:
    phase: float
    amplitude: complex
    snr: float

    @property
    def low_contrast(self) -> bool:
        return self.snr < SNR_THRESHOLD


def read_sideband(profile: FringeProfile, k0: float, dk: float | None = None, x0: float = 0.0,
                  n_k: int = 65) -> SidebandReading:
    """Sideband-integrated complex amplitude and a signal-to-noise estimate.

    The noise level is the rms transform magnitude in ``[1.6 k0, 2.4 k0]``,
    where a sinusoidal fringe has no content, floored at 1e-3 of the windowed
    zero-frequency amplitude.
    """
    if dk is None:
        dk = 0.5 * k0
    if k0 - 0.5 * dk <= 0:
        raise ValueError("sideband window must exclude k = 0")
    ks = np.linspace(k0 - 0.5 * dk, k0 + 0.5 * dk, n_k)
    spectrum = _transform(profile.x, profile.rho, ks, x0)
    amp = complex(np.trapezoid(spectrum, ks))

    kn = np.linspace(1.6 * k0, 2.4 * k0, n_k)
    noise = float(np.sqrt(np.mean(np.abs(_transform(profile.x, profile.rho, kn, x0)) ** 2)))
    # relative floor: contrast below ~1e-3 counts as no fringe even without noise
    window = np.hanning(profile.x.size + 2)[1:-1]
    floor = 1e-3 * abs(float(np.sum(profile.rho * window))) * profile.pitch
    snr = abs(amp) / dk / max(noise, floor, np.finfo(float).tiny)
    return SidebandReading(float(np.angle(amp)), amp, snr)


def extract_phase(profile: FringeProfile, k0: float, dk: float | None = None, x0: float = 0.0) -> float:
    """Fringe phase in (-pi, pi] from the argument of the ``+k0`` sideband.

    Parameters
    ----------
    profile : FringeProfile
    k0 : float
        Fringe wave number (rad per length unit).
    dk : float, optional
        Sideband window width, default ``k0 / 2``.
    x0 : float
        Envelope centre used as the phase origin.

    Warns
    -----
    LowContrastWarning
        When the sideband signal-to-noise ratio is below 3.
    """
    reading = read_sideband(profile, k0, dk, x0)
    if reading.low_contrast:
        warnings.warn(f"sideband SNR {reading.snr:.2f} below {SNR_THRESHOLD}", LowContrastWarning, stacklevel=2)
    return wrap_phase(reading.phase)


def _fringe_residual(theta, x, y):
    amp, center, width, contrast, phase, k = theta
    g = amp * np.exp(-0.5 * ((x - center) / width) ** 2)
    return g * (1.0 + contrast * np.cos(k * (x - center) + phase)) - y


def estimate_envelope_center(profiles: Sequence[FringeProfile], k0: float, *, max_contrast: float = 0.25) -> float:
    """Envelope centre from the average of several fringe profiles.

    The averaged profile is fitted with a Gaussian envelope times the fringe
    term (free centre, width, amplitude, contrast, phase and wave number).
    When the individual phases are spread the averaged fringes wash out and the
    centre is set by the envelope alone; a residual contrast above
    ``max_contrast`` triggers :class:`DegenerateEnsembleWarning`.
    """
    if len(profiles) < 1:
        raise ValueError("need at least one profile")
    x = profiles[0].x
    for p in profiles[1:]:
        if p.x.shape != x.shape or not np.allclose(p.x, x):
            raise ValueError("all profiles must share the same pixel grid")
    y = np.mean([p.rho for p in profiles], axis=0)
    weight = np.clip(y, 0, None)
    total = weight.sum()
    if total <= 0:
        raise EnvelopeFitError("averaged profile has no signal")
    c0 = float(np.sum(weight * x) / total)
    w0 = float(np.sqrt(np.sum(weight * (x - c0) ** 2) / total))
    theta0 = [float(y.max()), c0, w0, 0.1, 0.0, k0]
    lo = [0.0, x[0], 0.1 * w0, 0.0, -np.inf, 0.5 * k0]
    hi = [np.inf, x[-1], 10.0 * w0, 1.0, np.inf, 1.5 * k0]
    fit = least_squares(_fringe_residual, theta0, bounds=(lo, hi), args=(x, y),
                        x_scale=[theta0[0], w0, w0, 0.1, 1.0, 0.1 * k0], xtol=1e-12, ftol=1e-12)
    if not fit.success:
        raise EnvelopeFitError(f"envelope fit did not converge: {fit.message}")
    if fit.x[3] > max_contrast:
        warnings.warn(
            f"averaged fringe contrast {fit.x[3]:.2f} > {max_contrast}: phases are not spread enough "
            "to wash out the fringes, the centre estimate may be biased",
            DegenerateEnsembleWarning,
            stacklevel=2,
        )
    return float(fit.x[1])


@dataclass(frozen=True)
class CircularStats:
    resultant: float
    mean: float
    coherence: float
    count: int

    @property
    def circular_std(self) -> float:
        return math.sqrt(-2.0 * math.log(max(min(self.resultant, 1.0), np.finfo(float).tiny)))


def circular_stats(phases) -> CircularStats:
    """Phasor length ``R``, circular mean and coherence ``<cos phi>``."""
    phi = np.asarray(phases, dtype=float).ravel()
    if phi.size == 0:
        raise ValueError("circular statistics need at least one sample")
    z = np.exp(1j * phi).mean()
    r = min(float(abs(z)), 1.0)
    return CircularStats(r, float(np.angle(z)), float(np.mean(np.cos(phi))), int(phi.size))


def squeezing_factor(count_pairs) -> float:
    """Number squeezing ``std(N_L - N_R) / sqrt(<N_L + N_R>)``; 1 for binomial splitting."""
    c = np.asarray(count_pairs, dtype=float).reshape(-1, 2)
    if c.shape[0] < 2:
        raise ValueError("squeezing factor needs at least two shots")
    total = c.sum(axis=1)
    if np.any(total <= 0):
        raise ValueError("every shot must contain atoms")
    return float(np.std(c[:, 0] - c[:, 1], ddof=1) / math.sqrt(total.mean()))


@dataclass(frozen=True)
class DiffusionFit:
    rate: float
    intercept: float
    times: np.ndarray
    spread: np.ndarray


def diffusion_rate(samples: Mapping[float, Sequence[float]], *, min_times: int = 3, min_shots: int = 10) -> DiffusionFit:
    """Phase diffusion rate (rad/s) from the growth of the circular spread.

    ``samples`` maps hold time (s) to the phases measured there. The rate is the
    least-squares slope of the circular standard deviation against time.
    """
    if len(samples) < min_times:
        raise ValueError(f"need at least {min_times} hold times, got {len(samples)}")
    times = np.array(sorted(samples))
    spread, n = [], []
    for t in times:
        phi = np.asarray(samples[t], dtype=float)
        if phi.size < min_shots:
            raise ValueError(f"hold time {t} has {phi.size} shots, need {min_shots}")
        spread.append(circular_stats(phi).circular_std)
        n.append(phi.size)
    spread = np.array(spread)
    se = (spread + 1e-12) / np.sqrt(2.0 * np.array(n))
    drops = spread[:-1] - spread[1:]
    if np.any(drops > 3.0 * np.hypot(se[:-1], se[1:])):
        warnings.warn("phase spread decreases beyond noise between hold times", NonMonotonicDiffusionWarning,
                      stacklevel=2)
    slope, intercept = np.polyfit(times, spread, 1)
    return DiffusionFit(float(slope), float(intercept), times, spread)


@dataclass(frozen=True)
class SliceProfile:
    z: np.ndarray
    phase: np.ndarray
    spread: float
    omitted: tuple = field(default=())


def synth_image(model: FringeModel, x, z, phase_of_z: Callable | float | None = None, *,
                length: float = 60.0, noise: ShotNoise | None = None,
                rng: np.random.Generator | None = None) -> FringeImage:
    """2-D picture with a Gaussian longitudinal profile of rms ``length``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if phase_of_z is None:
        phases = np.full(z.size, model.phase)
    elif callable(phase_of_z):
        phases = np.asarray(phase_of_z(z), dtype=float) * np.ones(z.size)
    else:
        phases = np.full(z.size, float(phase_of_z))
    g = model.amplitude * np.exp(-0.5 * ((x - model.center) / model.width) ** 2)
    fringe = 1.0 + model.contrast * np.cos(model.wavenumber * (x[None, :] - model.center) + phases[:, None])
    rho = np.exp(-0.5 * (z / length) ** 2)[:, None] * g[None, :] * fringe
    if noise is not None:
        if rng is None:
            raise ValueError("a seeded random generator is required for noisy images")
        rho = _poisson(rho, noise, rng)
    return FringeImage(x, z, rho)


def phase_profile_2d(image: FringeImage, slice_height: int, k0: float, dk: float | None = None,
                     x0: float = 0.0) -> SliceProfile:
    """Phase along the long axis from transversely integrated slices.

    Rows are binned ``slice_height`` at a time; slices whose sideband SNR is
    below threshold are omitted with a :class:`LowContrastWarning`. ``spread``
    is the circular standard deviation of the kept slice phases.
    """
    nz = image.z.size
    n_slices = nz // slice_height
    if n_slices < 3:
        raise ValueError(f"need at least 3 slices, got {n_slices} from {nz} rows")
    zs, phases, omitted = [], [], []
    for i in range(n_slices):
        rows = slice(i * slice_height, (i + 1) * slice_height)
        zc = float(image.z[rows].mean())
        reading = read_sideband(FringeProfile(image.x, image.rho[rows].sum(axis=0)), k0, dk, x0)
        if reading.low_contrast:
            omitted.append(zc)
            continue
        zs.append(zc)
        phases.append(wrap_phase(reading.phase))
    if omitted:
        warnings.warn(f"{len(omitted)} of {n_slices} slices omitted for low contrast", LowContrastWarning,
                      stacklevel=2)
    spread = circular_stats(phases).circular_std if phases else math.nan
    return SliceProfile(np.array(zs), np.array(phases), spread, tuple(omitted))


def synth_dataset(pp: PendulumParams, atom_number: int, hold_times, shots: int, *,
                  phase_noise: float = 0.0, imbalance_noise: float = 0.0,
                  rng: np.random.Generator | None = None, channels=("phase", "imbalance"),
                  fringe: FringeModel | None = None, fringe_noise: ShotNoise | None = None,
                  metadata: dict | None = None, profile_sink: Callable | None = None,
                  pixels=None) -> Dataset:
    """Shot records drawn from the pendulum model.

    Each hold time gets ``shots`` phase and ``shots`` imbalance measurements,
    taken alternately as in the experiment. Imbalance shots taken at nominal
    hold time ``t`` sample the model at ``t + time_shift``. Phase shots are
    the model phase plus Gaussian noise, wrapped to (-pi, pi]; with ``fringe``
    set, each phase is instead read out from a synthetic fringe profile.
    Imbalance shots are converted to integer count pairs.
    ``profile_sink(t, shot, profile)`` receives every synthetic fringe profile;
    ``pixels`` overrides the default pixel grid of those profiles.
    """
    if rng is None:
        if phase_noise or imbalance_noise or fringe_noise is not None:
            raise ValueError("a seeded random generator is required for noisy datasets")
        rng = np.random.default_rng(0)
    hold_times = np.asarray(hold_times, dtype=float)
    want_phase = "phase" in channels
    want_imb = "imbalance" in channels
    phi_true = eval_phase(hold_times, pp)
    n_true = eval_imbalance(hold_times + pp.time_shift, pp)
    groups = []
    for i, t in enumerate(hold_times):
        phases, counts = [], []
        for shot in range(shots):
            if want_phase:
                phi = phi_true[i] + (rng.normal(0.0, phase_noise) if phase_noise else 0.0)
                if fringe is not None:
                    model = FringeModel(fringe.center, fringe.width, fringe.amplitude, fringe.contrast,
                                        fringe.wavenumber, float(wrap_phase(phi)))
                    prof = synth_profile(model, x=pixels, noise=fringe_noise, rng=rng)
                    if profile_sink is not None:
                        profile_sink(float(t), shot, prof)
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", LowContrastWarning)
                        phi = extract_phase(prof, fringe.wavenumber, x0=fringe.center)
                phases.append(float(wrap_phase(phi)))
            if want_imb:
                n = n_true[i] + (rng.normal(0.0, imbalance_noise) if imbalance_noise else 0.0)
                n = min(max(n, -1.0), 1.0)
                left = int(round(atom_number * (1.0 + n) / 2.0))
                counts.append((left, atom_number - left))
        groups.append(HoldGroup(float(t), tuple(phases), tuple(counts)))
    meta = {"shot_order": "alternating phase/imbalance", "shots_per_time": shots}
    meta.update(metadata or {})
    return Dataset(int(atom_number), tuple(groups), meta)
