"""Run configurations: JSON schemas, validation and typed config objects.

Every config is a JSON document carrying ``schema_version``. Validation runs
against the schema of the requested verb before anything is executed, and
errors name the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .core import PendulumParams, TwoModeParams, hz_to_angular
from .elliptic import complete_K

SCHEMA_VERSION = 1
VERBS = ("simulate", "model", "synth", "fit", "stats", "scaling")


class ConfigError(ValueError):
    """Schema or semantic validation failure of a run config."""


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

_TWO_MODE = {
    "type": "object",
    "required": ["atom_number", "interaction", "tunneling"],
    "additionalProperties": False,
    "properties": {
        "atom_number": {"type": "integer", "minimum": 2},
        "units": {"enum": ["hz", "rad_s"]},
        "interaction": _pos,
        "tunneling": _nonneg,
        "viscosity": _nonneg,
        "detuning": _num,
    },
}

_PENDULUM = {
    "type": "object",
    "required": ["phase_amplitude", "imbalance_amplitude", "frequency"],
    "additionalProperties": False,
    "properties": {
        "phase_amplitude": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": math.pi},
        "imbalance_amplitude": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "frequency": _pos,
        "decay_time": {"oneOf": [_pos, {"type": "null"}]},
        "sn_shift": _num,
        "sn_shift_quarters": _num,
        "phase_offset": _num,
        "imbalance_offset": _num,
        "time_shift": _num,
    },
    "not": {"required": ["sn_shift", "sn_shift_quarters"]},
}

_GRID = {
    "oneOf": [
        {
            "type": "object",
            "required": ["t_end", "step"],
            "additionalProperties": False,
            "properties": {"t_start": _nonneg, "t_end": _pos, "step": _pos},
        },
        {"type": "array", "items": _nonneg, "minItems": 1},
    ]
}

_SOURCE = {
    "oneOf": [
        {"type": "object", "required": ["pendulum"], "additionalProperties": False,
         "properties": {"pendulum": _PENDULUM}},
        {"type": "object", "required": ["two_mode", "phase_amplitude"], "additionalProperties": False,
         "properties": {"two_mode": _TWO_MODE,
                        "phase_amplitude": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": math.pi},
                        "phase_offset": _num, "time_shift": _num}},
    ]
}

_COMMON = {
    "schema_version": {"const": SCHEMA_VERSION},
    "verb": {"enum": list(VERBS)},
    "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    "output_dir": {"type": "string"},
    "description": {"type": "string"},
}


def _schema(required, properties):
    return {
        "type": "object",
        "required": ["schema_version", *required],
        "additionalProperties": False,
        "properties": {**_COMMON, **properties},
    }


SCHEMAS = {
    "simulate": _schema(["two_mode", "initial", "grid"], {
        "two_mode": _TWO_MODE,
        "initial": {"type": "object", "required": ["imbalance", "phase"], "additionalProperties": False,
                    "properties": {"imbalance": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
                                   "phase": _num}},
        "grid": _GRID,
        "damped": {"type": "boolean"},
    }),
    "model": _schema(["source", "grid"], {
        "source": _SOURCE,
        "grid": _GRID,
        "atom_number": {"type": "integer", "minimum": 2},
    }),
    "synth": _schema(["source", "hold_times", "shots"], {
        "source": _SOURCE,
        "atom_number": {"type": "integer", "minimum": 2},
        "hold_times": _GRID,
        "shots": {"type": "integer", "minimum": 1},
        "noise": {"type": "object", "additionalProperties": False,
                  "properties": {"phase": _nonneg, "imbalance": _nonneg}},
        "channels": {"type": "array", "minItems": 1, "uniqueItems": True,
                     "items": {"enum": ["phase", "imbalance"]}},
        "fringe": {"type": "object", "additionalProperties": False, "properties": {
            "contrast": {"type": "number", "minimum": 0, "maximum": 1},
            "period": _pos, "envelope_width": _pos, "center": _num,
            "pixels": {"type": "integer", "minimum": 8}, "pitch": _pos,
            "atoms": _pos, "read_noise": _nonneg, "write_profiles": {"type": "boolean"},
        }},
    }),
    "fit": _schema(["dataset"], {
        "dataset": {"type": "string"},
        "guess": _PENDULUM,
        "options": {"type": "object", "additionalProperties": False, "properties": {
            "weighted": {"type": "boolean"},
            "balance_channels": {"type": "boolean"},
            "fixed": {"type": "object", "additionalProperties": _num},
            "max_time_shift": _pos,
            "shift_mode": {"enum": ["interpolate", "model"]},
            "n_phase_starts": {"type": "integer", "minimum": 1},
            "frequency_factors": {"type": "array", "items": _pos, "minItems": 1},
            "max_iter": {"type": "integer", "minimum": 1},
            "decay_time_cap": _pos,
            "fallback_imbalance_amplitude": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        }},
    }),
    "stats": _schema([], {
        "dataset": {"type": "string"},
        "ensembles": {"type": "array", "items": {
            "type": "object", "required": ["sigma", "count"], "additionalProperties": False,
            "properties": {"label": {"type": "string"}, "sigma": _nonneg, "mean": _num,
                           "count": {"type": "integer", "minimum": 1}}}},
        "binomial": {"type": "object", "required": ["atoms", "shots"], "additionalProperties": False,
                     "properties": {"atoms": {"type": "integer", "minimum": 1},
                                    "shots": {"type": "integer", "minimum": 2}}},
        "min_shots": {"type": "integer", "minimum": 2},
    }),
    "scaling": _schema([], {
        "points": {"type": "array", "items": {
            "type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
        "reports": {"type": "array", "items": {"type": "string"}},
        "curve": {"type": "object", "additionalProperties": False, "properties": {
            "n_min": _pos, "n_max": _pos, "samples": {"type": "integer", "minimum": 2}}},
    }),
}


def validate(doc, verb: str) -> None:
    """Raise :class:`ConfigError` listing every schema violation."""
    if verb not in SCHEMAS:
        raise ConfigError(f"unknown verb {verb!r}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("verb", verb) != verb:
        raise ConfigError(f"config is for verb {doc['verb']!r}, not {verb!r}")
    validator = jsonschema.Draft7Validator(SCHEMAS[verb])
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{where}: {err.message}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))


def two_mode_from(block: dict) -> TwoModeParams:
    conv = hz_to_angular if block.get("units", "hz") == "hz" else float
    return TwoModeParams(
        block["atom_number"],
        conv(block["interaction"]),
        conv(block["tunneling"]),
        float(block.get("viscosity", 0.0)),
        conv(block.get("detuning", 0.0)),
    )


def pendulum_from(block: dict) -> PendulumParams:
    tau = block.get("decay_time")
    pp = PendulumParams(
        phase_amplitude=block["phase_amplitude"],
        imbalance_amplitude=block["imbalance_amplitude"],
        frequency=block["frequency"],
        decay_time=math.inf if tau is None else tau,
        sn_shift=block.get("sn_shift", 0.0),
        phase_offset=block.get("phase_offset", 0.0),
        imbalance_offset=block.get("imbalance_offset", 0.0),
        time_shift=block.get("time_shift", 0.0),
    )
    if "sn_shift_quarters" in block:
        pp = pp.replace(sn_shift=block["sn_shift_quarters"] * complete_K(pp.modulus))
    return pp


def grid_from(block) -> np.ndarray:
    """Time grid from ``{"t_start", "t_end", "step"}`` or an explicit list."""
    if isinstance(block, list):
        t = np.asarray(block, dtype=float)
    else:
        start = block.get("t_start", 0.0)
        n = int(math.floor((block["t_end"] - start) / block["step"] + 1e-9)) + 1
        if n < 1:
            raise ConfigError("grid: t_end must not precede t_start")
        t = start + block["step"] * np.arange(n)
    if np.any(np.diff(t) <= 0):
        raise ConfigError("grid: times must be strictly increasing")
    return t


@dataclass
class RunConfig:
    """A validated config with its resolved seed and output directory."""

    verb: str
    doc: dict
    path: Path
    seed: int | None = None
    out_dir: Path = field(default_factory=lambda: Path("bjj_out"))

    def resolve(self, rel: str) -> Path:
        """Resolve a path in the config relative to the config file's directory."""
        p = Path(rel)
        return p if p.is_absolute() else self.path.parent / p

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError(f"verb {self.verb!r} is stochastic: pass --seed or set 'seed' in the config")
        return self.seed
