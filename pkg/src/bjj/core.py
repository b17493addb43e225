"""Shared domain types, unit conventions and serialization.

Units: energies are stored as angular frequencies (energy divided by hbar, in
rad/s), times in seconds, phases in radians. Values quoted as ``X/h`` in Hz are
the stored value divided by 2*pi; the ``*_hz`` helpers do that conversion.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

TWO_PI = 2.0 * math.pi


def hz_to_angular(f_hz):
    """Convert a frequency quoted as ``E/h`` in Hz to rad/s."""
    return TWO_PI * f_hz


def angular_to_hz(w):
    """Convert rad/s to the ``E/h`` in Hz convention."""
    return w / TWO_PI


def wrap_phase(phi):
    """Wrap angles onto (-pi, pi]."""
    wrapped = np.mod(np.asarray(phi, dtype=float) + np.pi, TWO_PI) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class TwoModeParams:
    """Microscopic two-mode parameters of the junction.

    ``interaction``, ``tunneling`` and ``detuning`` are in rad/s.
    """

    atom_number: int
    interaction: float
    tunneling: float
    viscosity: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        if int(self.atom_number) != self.atom_number or self.atom_number < 2:
            raise ValueError(f"atom_number must be an integer >= 2, got {self.atom_number}")
        object.__setattr__(self, "atom_number", int(self.atom_number))
        if not self.interaction > 0:
            raise ValueError(f"interaction must be > 0, got {self.interaction}")
        if not self.tunneling >= 0:
            raise ValueError(f"tunneling must be >= 0, got {self.tunneling}")
        if not self.viscosity >= 0:
            raise ValueError(f"viscosity must be >= 0, got {self.viscosity}")
        if not math.isfinite(self.detuning):
            raise ValueError("detuning must be finite")

    @classmethod
    def from_hz(cls, atom_number, interaction_hz, tunneling_hz, viscosity=0.0, detuning_hz=0.0):
        return cls(
            atom_number,
            hz_to_angular(interaction_hz),
            hz_to_angular(tunneling_hz),
            viscosity,
            hz_to_angular(detuning_hz),
        )

    @property
    def interaction_hz(self) -> float:
        return angular_to_hz(self.interaction)

    @property
    def tunneling_hz(self) -> float:
        return angular_to_hz(self.tunneling)

    @property
    def detuning_hz(self) -> float:
        return angular_to_hz(self.detuning)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TwoModeParams":
        return cls(**d)


def regime_ratio(p: TwoModeParams) -> float:
    """Return ``N U / 2J``; of order 100 deep in the Josephson regime."""
    if p.tunneling == 0:
        raise ZeroDivisionError("regime ratio NU/2J is undefined for zero tunnel coupling")
    return p.atom_number * p.interaction / (2.0 * p.tunneling)


@dataclass(frozen=True)
class PendulumParams:
    """Parameters of the damped elliptic-pendulum model.

    Attributes
    ----------
    phase_amplitude : float
        Initial phase amplitude, in (0, pi).
    imbalance_amplitude : float
        Imbalance amplitude prefactor, in (0, 1).
    frequency : float
        Harmonic angular frequency in rad/s.
    decay_time : float
        Exponential decay time in s. ``math.inf`` means undamped.
    sn_shift : float
        Offset added to ``frequency * t`` inside the sn function (rad).
    phase_offset, imbalance_offset : float
        Additive technical offsets of the two channels.
    time_shift : float
        Delay between the imbalance and the phase channel, in s.
    """

    phase_amplitude: float
    imbalance_amplitude: float
    frequency: float
    decay_time: float
    sn_shift: float = 0.0
    phase_offset: float = 0.0
    imbalance_offset: float = 0.0
    time_shift: float = 0.0

    def __post_init__(self):
        if not 0 < self.phase_amplitude < math.pi:
            raise ValueError(f"phase_amplitude must lie in (0, pi), got {self.phase_amplitude}")
        if not 0 < self.imbalance_amplitude < 1:
            raise ValueError(f"imbalance_amplitude must lie in (0, 1), got {self.imbalance_amplitude}")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        if not self.decay_time > 0:
            raise ValueError(f"decay_time must be > 0, got {self.decay_time}")

    @property
    def modulus(self) -> float:
        """Elliptic modulus at t = 0, ``sin(phase_amplitude / 2)``."""
        return math.sin(0.5 * self.phase_amplitude)

    @property
    def is_undamped(self) -> bool:
        return math.isinf(self.decay_time)

    def replace(self, **changes) -> "PendulumParams":
        d = asdict(self)
        d.update(changes)
        return PendulumParams(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PendulumParams":
        return cls(**d)


@dataclass(frozen=True)
class JunctionState:
    imbalance: float
    phase: float

    def __post_init__(self):
        if abs(self.imbalance) > 1:
            raise ValueError(f"|imbalance| must be <= 1, got {self.imbalance}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled (n, phi) trajectory; the phase is kept unwrapped."""

    times: np.ndarray
    imbalance: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        n = np.asarray(self.imbalance, dtype=float)
        phi = np.asarray(self.phase, dtype=float)
        if not (t.shape == n.shape == phi.shape) or t.ndim != 1:
            raise ValueError("times, imbalance and phase must be 1-D arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, arr in (("times", t), ("imbalance", n), ("phase", phi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.imbalance, other.imbalance)
            and np.array_equal(self.phase, other.phase)
        )

    @property
    def states(self) -> Iterator[JunctionState]:
        for n, phi in zip(self.imbalance, self.phase):
            yield JunctionState(float(n), float(phi))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t_s,n,phi_rad\n")
        for t, n, phi in zip(self.times, self.imbalance, self.phase):
            buf.write(f"{float(t)!r},{float(n)!r},{float(phi)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t_s", "n", "phi_rad"]:
            raise ValueError("trajectory CSV must start with header 't_s,n,phi_rad'")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2])


PHASE = "phase"
IMBALANCE = "imbalance"


@dataclass(frozen=True)
class HoldGroup:
    """All shots taken at one hold time.

    ``phases`` holds per-shot relative phases (rad); ``counts`` holds per-shot
    ``(N_L, N_R)`` atom-number pairs. Either may be empty, which is how a
    group records which measurement channel(s) it belongs to.
    """

    hold_time: float
    phases: tuple = ()
    counts: tuple = ()

    def __post_init__(self):
        if self.hold_time < 0:
            raise ValueError(f"hold time must be non-negative, got {self.hold_time}")
        phases = tuple(float(p) for p in self.phases)
        counts = tuple((int(a), int(b)) for a, b in self.counts)
        if not phases and not counts:
            raise ValueError(f"hold time {self.hold_time} has no shots")
        for a, b in counts:
            if a < 0 or b < 0 or a + b == 0:
                raise ValueError(f"invalid count pair ({a}, {b}) at hold time {self.hold_time}")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "counts", counts)

    @property
    def channels(self) -> tuple:
        out = []
        if self.phases:
            out.append(PHASE)
        if self.counts:
            out.append(IMBALANCE)
        return tuple(out)

    @property
    def imbalances(self) -> np.ndarray:
        c = np.asarray(self.counts, dtype=float).reshape(-1, 2)
        return (c[:, 0] - c[:, 1]) / (c[:, 0] + c[:, 1])


@dataclass(frozen=True)
class Channel:
    """Per-hold-time means and standard errors of one measurement channel."""

    times: np.ndarray
    values: np.ndarray
    sem: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class Dataset:
    atom_number: int
    groups: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        groups = tuple(g if isinstance(g, HoldGroup) else HoldGroup(**g) for g in self.groups)
        if not groups:
            raise ValueError("dataset has no hold-time groups")
        times = [g.hold_time for g in groups]
        if len(set(times)) != len(times):
            raise ValueError("hold times must be unique")
        object.__setattr__(self, "groups", tuple(sorted(groups, key=lambda g: g.hold_time)))

    def phase_channel(self) -> Channel:
        """Circular mean phase per hold time with its standard error."""
        sel = [g for g in self.groups if g.phases]
        t = np.array([g.hold_time for g in sel])
        means, sems = [], []
        for g in sel:
            z = np.exp(1j * np.asarray(g.phases))
            m = float(np.angle(z.mean()))
            dev = wrap_phase(np.asarray(g.phases) - m)
            means.append(m)
            sems.append(_sem(dev))
        return Channel(t, np.array(means), np.array(sems))

    def imbalance_channel(self) -> Channel:
        sel = [g for g in self.groups if g.counts]
        t = np.array([g.hold_time for g in sel])
        vals = [g.imbalances for g in sel]
        return Channel(t, np.array([v.mean() for v in vals]), np.array([_sem(v) for v in vals]))

    def to_dict(self) -> dict:
        return {
            "atom_number": self.atom_number,
            "metadata": self.metadata,
            "groups": [
                {"hold_time": g.hold_time, "phases": list(g.phases), "counts": [list(c) for c in g.counts]}
                for g in self.groups
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        try:
            groups = [
                HoldGroup(
                    float(g["hold_time"]),
                    tuple(g.get("phases", ())),
                    tuple(tuple(c) for c in g.get("counts", ())),
                )
                for g in d["groups"]
            ]
            return cls(int(d["atom_number"]), tuple(groups), dict(d.get("metadata", {})))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed dataset: {exc!r}") from exc


def _sem(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return 0.0
    return float(x.std(ddof=1) / math.sqrt(x.size))


def dumps(obj: dict) -> str:
    """Serialize a key/value tree; floats are written with round-trip precision."""
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)

