"""Command-line front end: ``bjj <verb> --config <path> [--out <dir>] [--seed <u64>]``.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
``BJJ_OUT_DIR`` overrides the output directory given in the config; ``--out``
overrides both.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import VERBS, ConfigError, RunConfig, grid_from, pendulum_from, two_mode_from, validate
from .core import Dataset, JunctionState, Trajectory, angular_to_hz, dumps, wrap_phase
from .dynamics import (RTOL, ATOL, IntegrationError, RegimeLabel, SingularityError, classify_regime, integrate,
                       separatrix_lhs)
from .elliptic import EllipticDomainError
from .fitting import (FitOptions, FitProblem, FitReport, GuessError, ShiftError, channel_tables, fit_joint,
                      power_law_fit, report_summary)
from .measurement import (N_PIXELS, PIXEL_PITCH, FringeModel, ShotNoise, circular_stats, diffusion_rate, pixel_grid,
                          squeezing_factor, synth_dataset)
from .pendulum import (AmplitudeOverflowError, DegenerateAmplitudeError, eval_imbalance, eval_phase,
                       oscillation_period, pendulum_to_two_mode, two_mode_to_pendulum)
from .rng import substream

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
OUT_ENV = "BJJ_OUT_DIR"

log = logging.getLogger("bjj")

NUMERICAL_ERRORS = (ArithmeticError, IntegrationError, SingularityError, GuessError, ShiftError,
                    EllipticDomainError, AmplitudeOverflowError, DegenerateAmplitudeError, np.linalg.LinAlgError)


class NumericalFailure(RuntimeError):
    """A verb ran but its numerical result is not usable."""


class RegimeError(ConfigError):
    pass


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)
    return path


def _csv(header: str, rows) -> str:
    lines = [header]
    for row in np.asarray(rows, dtype=float):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _load_json(path: Path, what: str) -> dict:
    text = path.read_text(encoding="utf-8")  # OSError propagates as an I/O failure
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc


def _source(cfg: RunConfig):
    """Pendulum parameters and atom number (or None) from a ``source`` block."""
    src = cfg.doc["source"]
    if "pendulum" in src:
        return pendulum_from(src["pendulum"]), cfg.doc.get("atom_number")
    two = two_mode_from(src["two_mode"])
    pp = two_mode_to_pendulum(two, src["phase_amplitude"])
    pp = pp.replace(phase_offset=src.get("phase_offset", 0.0), time_shift=src.get("time_shift", 0.0))
    return pp, cfg.doc.get("atom_number", two.atom_number)


def _two_mode_dict(two) -> dict:
    return {**two.to_dict(), "interaction_hz": angular_to_hz(two.interaction),
            "tunneling_hz": angular_to_hz(two.tunneling), "detuning_hz": angular_to_hz(two.detuning)}


def run_simulate(cfg: RunConfig) -> list:
    doc = cfg.doc
    p = two_mode_from(doc["two_mode"])
    init_block = doc["initial"]
    init = JunctionState(init_block["imbalance"], init_block["phase"])
    regime, lhs = None, None
    if p.tunneling > 0:
        lhs = separatrix_lhs(init, p)
        regime = classify_regime(init, p)
        if regime is RegimeLabel.SELF_TRAPPED:
            raise RegimeError(f"initial state is self-trapped (criterion value {lhs:.6g} > 1); "
                              "only the Josephson-oscillation regime is supported")
    t = grid_from(doc["grid"])
    damped = doc.get("damped", True)
    traj, stats = integrate(p, init, t, damped=damped, return_stats=True)
    meta = {
        "verb": "simulate",
        "two_mode": _two_mode_dict(p),
        "initial": {"imbalance": init.imbalance, "phase": init.phase},
        "damped": damped,
        "regime": None if regime is None else regime.value,
        "regime_criterion": lhs,
        "integrator": {"method": "DOP853", "rtol": RTOL, "atol": ATOL, "nfev": stats.nfev,
                       "message": stats.message},
        "energy_drift": stats.energy_drift,
        "energy_conserving": (not damped or p.viscosity == 0) and p.detuning == 0,
        "n_points": len(traj),
    }
    return [_write(cfg.out_dir / "trajectory.csv", traj.to_csv()),
            _write(cfg.out_dir / "trajectory.meta.json", dumps(meta))]


def run_model(cfg: RunConfig) -> list:
    pp, atom_number = _source(cfg)
    t = grid_from(cfg.doc["grid"])
    traj = Trajectory(t, eval_imbalance(t, pp), eval_phase(t, pp))
    meta = {"verb": "model", "pendulum": pp.to_dict(), "period_s": oscillation_period(pp)}
    if atom_number is not None:
        meta["two_mode"] = _two_mode_dict(pendulum_to_two_mode(pp, atom_number))
    return [_write(cfg.out_dir / "model.csv", traj.to_csv()),
            _write(cfg.out_dir / "model.meta.json", dumps(meta))]


def run_synth(cfg: RunConfig) -> list:
    doc = cfg.doc
    seed = cfg.require_seed()
    pp, atom_number = _source(cfg)
    if atom_number is None:
        raise ConfigError("synth: atom_number is required with a pendulum source")
    noise = doc.get("noise", {})
    fringe, fringe_noise, sink = None, None, None
    written = []
    if "fringe" in doc:
        fb = doc["fringe"]
        fringe = FringeModel(center=fb.get("center", 0.0), width=fb.get("envelope_width", 120.0),
                             contrast=fb.get("contrast", 0.56),
                             wavenumber=2.0 * math.pi / fb.get("period", 130.0))
        if "atoms" in fb:
            fringe_noise = ShotNoise(fb["atoms"], fb.get("read_noise", 0.0))
        if fb.get("write_profiles", False):
            def sink(t, shot, prof):
                written.append(_write(cfg.out_dir / "profiles" / f"t{t * 1e3:09.4f}ms_shot{shot:03d}.csv",
                                      prof.to_csv()))
    pixels = None
    if "fringe" in doc and ("pixels" in doc["fringe"] or "pitch" in doc["fringe"]):
        fb = doc["fringe"]
        pixels = pixel_grid(fb.get("pixels", N_PIXELS), fb.get("pitch", PIXEL_PITCH), fb.get("center", 0.0))
    ds = synth_dataset(pp, atom_number, grid_from(doc["hold_times"]), doc["shots"],
                       phase_noise=noise.get("phase", 0.0), imbalance_noise=noise.get("imbalance", 0.0),
                       rng=substream(seed, "synth", "shots"),
                       channels=tuple(doc.get("channels", ("phase", "imbalance"))),
                       fringe=fringe, fringe_noise=fringe_noise,
                       metadata={"seed": seed, "source": pp.to_dict()}, profile_sink=sink, pixels=pixels)
    out = [_write(cfg.out_dir / "dataset.json", dumps(ds.to_dict()))]
    ph = ds.phase_channel()
    if len(ph):
        out.append(_write(cfg.out_dir / "phase_channel.csv",
                          _csv("t_s,phase_rad,sem_rad", np.column_stack([ph.times, ph.values, ph.sem]))))
    imb = ds.imbalance_channel()
    if len(imb):
        out.append(_write(cfg.out_dir / "imbalance_channel.csv",
                          _csv("t_s,n,sem", np.column_stack([imb.times, imb.values, imb.sem]))))
    return out + written


def _load_dataset(cfg: RunConfig) -> Dataset:
    path = cfg.resolve(cfg.doc["dataset"])
    return Dataset.from_dict(_load_json(path, "dataset"))


def run_fit(cfg: RunConfig) -> list:
    ds = _load_dataset(cfg)
    options = FitOptions(**{k: (tuple(v) if k == "frequency_factors" else v)
                            for k, v in cfg.doc.get("options", {}).items()})
    problem = FitProblem.from_dataset(ds, options)
    guess = pendulum_from(cfg.doc["guess"]) if "guess" in cfg.doc else None
    report = fit_joint(problem, guess)
    log.info("%s", report_summary(report))
    out = [_write(cfg.out_dir / "fit_report.json", dumps(report.to_dict()))]
    tables = channel_tables(problem, report.pendulum, report.diagnostics.get("fixed"))
    out.append(_write(cfg.out_dir / "residuals_phase.csv",
                      _csv("t_s,data_rad,model_rad,residual_rad", tables["phase"])))
    if "imbalance" in tables:
        out.append(_write(cfg.out_dir / "residuals_imbalance.csv",
                          _csv("t_s,data,model,residual", tables["imbalance"])))
    if not report.converged:
        raise NumericalFailure("fit did not converge; best-so-far report written")
    return out


def _stats_dict(phases) -> dict:
    cs = circular_stats(phases)
    return {"count": cs.count, "resultant": cs.resultant, "mean_phase": cs.mean, "coherence": cs.coherence,
            "circular_std": cs.circular_std}


def run_stats(cfg: RunConfig) -> list:
    doc = cfg.doc
    if not any(k in doc for k in ("dataset", "ensembles", "binomial")):
        raise ConfigError("stats: provide 'dataset', 'ensembles' or 'binomial'")
    result = {"verb": "stats"}
    rows = []
    if "dataset" in doc:
        ds = _load_dataset(cfg)
        if not ds.groups:
            raise ConfigError("stats: dataset is empty")
        per_time = []
        samples = {}
        for g in ds.groups:
            entry = {"hold_time_s": g.hold_time}
            if g.phases:
                entry.update(_stats_dict(g.phases))
                samples[g.hold_time] = g.phases
            if len(g.counts) >= 2:
                entry["squeezing"] = squeezing_factor(g.counts)
            per_time.append(entry)
            rows.append([g.hold_time, entry.get("resultant", math.nan), entry.get("mean_phase", math.nan),
                         entry.get("coherence", math.nan), entry.get("squeezing", math.nan)])
        result["hold_times"] = per_time
        min_shots = doc.get("min_shots", 10)
        eligible = {t: p for t, p in samples.items() if len(p) >= min_shots}
        if len(eligible) >= 3:
            fit = diffusion_rate(eligible, min_shots=min_shots)
            result["diffusion"] = {"rate_rad_per_s": fit.rate, "intercept_rad": fit.intercept}
        else:
            result["diffusion"] = None
    if "ensembles" in doc:
        seed = cfg.require_seed()
        result["ensembles"] = []
        for i, ens in enumerate(doc["ensembles"]):
            label = ens.get("label", f"ensemble{i}")
            rng = substream(seed, "stats", "ensemble", label)
            phases = wrap_phase(ens.get("mean", 0.0) + ens["sigma"] * rng.standard_normal(ens["count"]))
            result["ensembles"].append({"label": label, "sigma": ens["sigma"], **_stats_dict(phases)})
    if "binomial" in doc:
        seed = cfg.require_seed()
        b = doc["binomial"]
        left = substream(seed, "stats", "binomial").binomial(b["atoms"], 0.5, size=b["shots"])
        pairs = np.column_stack([left, b["atoms"] - left])
        result["binomial"] = {"atoms": b["atoms"], "shots": b["shots"], "squeezing": squeezing_factor(pairs)}
    out = [_write(cfg.out_dir / "stats.json", dumps(result))]
    if rows:
        out.append(_write(cfg.out_dir / "stats.csv",
                          _csv("t_s,resultant,mean_phase_rad,coherence,squeezing", rows)))
    return out


def run_scaling(cfg: RunConfig) -> list:
    doc = cfg.doc
    points = [list(p) for p in doc.get("points", [])]
    for rel in doc.get("reports", []):
        rep = FitReport.from_dict(_load_json(cfg.resolve(rel), "fit report"))
        points.append([rep.atom_number, rep.pendulum.decay_time])
    fit = power_law_fit(points)
    n = np.asarray(points, dtype=float)[:, 0]
    curve = doc.get("curve", {})
    grid = np.geomspace(curve.get("n_min", n.min()), curve.get("n_max", n.max()), curve.get("samples", 100))
    result = {"verb": "scaling", **fit.to_dict(), "points": points}
    return [_write(cfg.out_dir / "scaling.json", dumps(result)),
            _write(cfg.out_dir / "scaling_curve.csv", _csv("N,tau_s", np.column_stack([grid, fit(grid)])))]


RUNNERS = {"simulate": run_simulate, "model": run_model, "synth": run_synth, "fit": run_fit,
           "stats": run_stats, "scaling": run_scaling}


def _out_dir(args, doc) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(doc.get("output_dir", "bjj_out"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bjj", description="Bosonic Josephson junction simulation and fitting.")
    parser.add_argument("--version", action="version", version=f"bjj {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path)
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="bjj: %(message)s", stream=sys.stderr)
    try:
        doc = _load_json(args.config, "config")
        validate(doc, args.verb)
        seed = args.seed if args.seed is not None else doc.get("seed")
        if seed is not None and not 0 <= seed < 2**64:
            raise ConfigError(f"seed must lie in [0, 2**64 - 1], got {seed}")
        cfg = RunConfig(args.verb, doc, args.config, seed, _out_dir(args, doc))
        for path in RUNNERS[args.verb](cfg):
            print(path)
        return EXIT_OK
    except NUMERICAL_ERRORS as exc:
        print(f"bjj {args.verb}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalFailure as exc:
        print(f"bjj {args.verb}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"bjj {args.verb}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"bjj {args.verb}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
