"""Command-line front end.

Subcommands: fringe, spectrum, snr, clock and allan.  Every command reads a
YAML config, writes delimited data (CSV by default, JSON with --format
json), renders a matplotlib figure next to it unless --no-plot is given, and
records a manifest of produced files.  Exit codes: 0 success, 2 config
error, 3 runtime/model error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import plots
from .atoms import TwoLevelAtom, ramsey_probability_averaged, slow_decay_margin
from .clock import projection_noise_snr, run_clock, run_comparison
from .config import build_clock_run, build_section, load_config
from .detection import snr_coherent, snr_squeezed, squeezing_spectrum
from .errors import ConfigError, ModelError
from .report import (
    RunManifest,
    read_record,
    snapshot_digest,
    write_curve,
    write_json,
    write_record,
    write_series,
)
from .stability import allan_deviation, fit_slope, octave_taus, predicted_sigma

log = logging.getLogger("sqclock")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="path to the YAML run configuration")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--out", default=".", help="output directory (created if needed)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqclock",
        description="Simulate and analyse squeezed-light detection in a Cs clock.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fringe", "transition probability over a detuning grid"),
        ("spectrum", "squeezing spectrum over analysis-frequency and phase grids"),
        ("snr", "coherent vs squeezed signal-to-noise over a parameter sweep"),
        ("clock", "closed-loop clock run producing a frequency record"),
        ("allan", "Allan deviation of a record, with slope fit and prediction"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        _add_common(cmd)
        if name == "clock":
            cmd.add_argument(
                "--compare",
                action="store_true",
                help="run paired coherent/squeezed records under common random numbers",
            )
        if name == "allan":
            cmd.add_argument(
                "--record",
                default=None,
                help="analyse an existing record file instead of running the clock",
            )
    return parser


def _manifest(args, command: str, snapshot: dict, seed) -> RunManifest:
    return RunManifest(
        command=command,
        config_path=args.config,
        config_sha256=snapshot_digest(snapshot),
        seed=seed,
        out_dir=args.out,
    )


def cmd_fringe(args) -> None:
    started = time.perf_counter()
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    geom = build_section(cfg, "ramsey", required=True)
    atom = build_section(cfg, "atom", default=TwoLevelAtom(1.0))
    res = build_section(cfg, "reservoir")
    grid = build_section(cfg, "fringe")
    span = 5.0 * math.pi / geom.free_time
    lo = grid.delta_min if grid.delta_min is not None else -span
    hi = grid.delta_max if grid.delta_max is not None else span
    if not hi > lo:
        raise ConfigError(f"[fringe] empty detuning range [{lo}, {hi}]")
    deltas = np.linspace(lo, hi, grid.points)
    probs = np.array(
        [
            ramsey_probability_averaged(
                geom, atom, float(d), res, vacuum_decay=grid.vacuum_decay
            )
            for d in deltas
        ]
    )
    snapshot = {
        "command": "fringe",
        "ramsey": dataclasses.asdict(geom),
        "atom": dataclasses.asdict(atom),
        "reservoir": dataclasses.asdict(res),
        "fringe": dataclasses.asdict(grid),
    }
    manifest = _manifest(args, "fringe", snapshot, None)
    path = write_series(
        os.path.join(args.out, "fringe"),
        ["delta_rad_s", "probability"],
        zip(deltas, probs),
        args.format,
    )
    manifest.add(path)
    if not args.no_plot:
        manifest.add(plots.save_fringe(os.path.join(args.out, "fringe.png"), deltas, probs))
    manifest.write(started)
    print(f"fringe: {grid.points} points -> {args.out}")


def cmd_spectrum(args) -> None:
    started = time.perf_counter()
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    det = build_section(cfg, "detection")
    grid = build_section(cfg, "spectrum")
    omega_max = grid.omega_max if grid.omega_max is not None else 5.0 * det.f_width
    omegas = np.linspace(grid.omega_min, omega_max, grid.omega_points)
    phis = np.linspace(grid.phi_min, grid.phi_max, grid.phi_points)
    values = np.empty((phis.size, omegas.size))
    rows = []
    for i, phi in enumerate(phis):
        for j, omega in enumerate(omegas):
            s = squeezing_spectrum(
                replace(det, omega_0=float(omega), phi_minus=float(phi)), grid.atom_flux
            )
            values[i, j] = s
            rows.append((omega, phi, s))
    snapshot = {
        "command": "spectrum",
        "detection": dataclasses.asdict(det),
        "spectrum": dataclasses.asdict(grid),
    }
    manifest = _manifest(args, "spectrum", snapshot, None)
    path = write_series(
        os.path.join(args.out, "spectrum"),
        ["omega_0_rad_s", "phi_minus_rad", "spectrum"],
        rows,
        args.format,
    )
    manifest.add(path)
    if not args.no_plot:
        manifest.add(
            plots.save_spectrum(os.path.join(args.out, "spectrum.png"), omegas, phis, values)
        )
    manifest.write(started)
    print(f"spectrum: {len(rows)} grid points -> {args.out}")


def cmd_snr(args) -> None:
    started = time.perf_counter()
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    det = build_section(cfg, "detection")
    budget = build_section(cfg, "budget", required=True)
    response = build_section(cfg, "response", required=True)
    sweep = build_section(cfg, "snr")
    xs = np.linspace(sweep.start, sweep.stop, sweep.points)
    vac = snr_coherent(budget, response)
    rows = []
    for x in xs:
        det_x = replace(det, **{sweep.sweep: float(x)})
        sq = snr_squeezed(budget, response, det_x, sweep.atom_flux)
        ratio = sq / vac if vac > 0.0 else math.nan
        rows.append((x, vac, sq, ratio))
    column = "xi" if sweep.sweep == "xi" else "phi_minus_rad"
    snapshot = {
        "command": "snr",
        "detection": dataclasses.asdict(det),
        "budget": dataclasses.asdict(budget),
        "response": dataclasses.asdict(response),
        "snr": dataclasses.asdict(sweep),
    }
    manifest = _manifest(args, "snr", snapshot, None)
    path = write_series(
        os.path.join(args.out, "snr"),
        [column, "snr_coherent", "snr_squeezed", "improvement"],
        rows,
        args.format,
    )
    manifest.add(path)
    if not args.no_plot:
        manifest.add(
            plots.save_snr(
                os.path.join(args.out, "snr.png"),
                xs,
                column,
                [r[1] for r in rows],
                [r[2] for r in rows],
                [r[3] for r in rows],
            )
        )
    manifest.write(started)
    print(f"snr: {sweep.points} sweep points -> {args.out}")


def _clock_snapshot(run, compare: bool) -> dict:
    return {
        "command": "clock",
        "clock": dataclasses.asdict(run.config),
        "n_cycles": run.n_cycles,
        "compare": compare,
    }


def _check_detection_regime(cfg: dict, run) -> None:
    # squeezed detection relies on the slow quadrature outliving the
    # measurement; warn when the configured reservoir does not provide that
    if run.config.detection_mode != "squeezed" or "reservoir" not in cfg:
        return
    res = build_section(cfg, "reservoir")
    atom = build_section(cfg, "atom", default=TwoLevelAtom(1.0))
    margin = slow_decay_margin(res, atom.gamma, run.config.budget.t_meas)
    if margin <= 1.0:
        log.warning(
            "slow-quadrature lifetime is only %.3g of the detection interaction "
            "time; squeezed detection assumes it is longer",
            margin,
        )


def cmd_clock(args) -> None:
    started = time.perf_counter()
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    run = build_clock_run(cfg, seed_override=args.seed)
    compare = args.compare or run.compare
    _check_detection_regime(cfg, run)
    snapshot = _clock_snapshot(run, compare)
    manifest = _manifest(args, "clock", snapshot, run.config.seed)
    if compare:
        coherent, squeezed = run_comparison(run.config, run.n_cycles)
        for path in write_record(args.out, "clock_coherent", coherent, args.format, snapshot):
            manifest.add(path)
        for path in write_record(args.out, "clock_squeezed", squeezed, args.format, snapshot):
            manifest.add(path)
        if not args.no_plot:
            manifest.add(
                plots.save_record(
                    os.path.join(args.out, "clock_compare.png"),
                    {"coherent": coherent, "squeezed": squeezed},
                )
            )
        skipped = coherent.metadata["skipped_pairs"] + squeezed.metadata["skipped_pairs"]
        n_out = coherent.samples.size
    else:
        record = run_clock(run.config, run.n_cycles)
        for path in write_record(args.out, "clock_record", record, args.format, snapshot):
            manifest.add(path)
        if not args.no_plot:
            manifest.add(
                plots.save_record(
                    os.path.join(args.out, "clock_record.png"),
                    {run.config.detection_mode: record},
                )
            )
        skipped = record.metadata["skipped_pairs"]
        n_out = record.samples.size
    manifest.write(started)
    print(f"clock: {n_out} samples ({skipped} skipped pairs) -> {args.out}")


def cmd_allan(args) -> None:
    started = time.perf_counter()
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    spec = build_section(cfg, "allan")
    line = build_section(cfg, "line")

    if args.record is not None:
        record = read_record(args.record)
        seed = record.metadata.get("seed")
        source = args.record
    else:
        run = build_clock_run(cfg, seed_override=args.seed)
        record = run_clock(run.config, run.n_cycles)
        seed = run.config.seed
        source = "clock run"

    if isinstance(spec.taus, str):
        taus = octave_taus(record)
    else:
        taus = [m * record.tau0 for m in spec.taus]
    if not taus:
        raise ModelError("record too short for any averaging time")
    curve = allan_deviation(record, taus)
    if curve.taus.size == 0:
        raise ModelError("no feasible averaging times for this record")

    n_atoms = record.metadata.get("n_atoms")
    noise_scale = record.metadata.get("noise_scale", 1.0)
    if n_atoms is None and "clock" in cfg:
        run_cfg = build_clock_run(cfg).config
        n_atoms = run_cfg.n_atoms
        noise_scale = run_cfg.noise_scale()
    if n_atoms is None:
        raise ConfigError(
            "cannot build the predicted-sigma overlay: record metadata lacks "
            "n_atoms and the config has no [clock] section"
        )
    snr = projection_noise_snr(n_atoms, noise_scale if noise_scale > 0.0 else 1.0)
    predicted = np.array([predicted_sigma(line, snr, float(t)) for t in curve.taus])

    fit_lo = spec.fit_min_tau if spec.fit_min_tau is not None else float(curve.taus[0])
    fit_hi = spec.fit_max_tau if spec.fit_max_tau is not None else float(curve.taus[-1])
    fit: dict | None
    try:
        exponent, level = fit_slope(curve, (fit_lo, fit_hi))
        fit = {"exponent": exponent, "sigma_at_1s": level, "tau_range": [fit_lo, fit_hi]}
    except ModelError:
        fit = None

    ratios = curve.sigmas / predicted
    snapshot = {
        "command": "allan",
        "source": source,
        "line": dataclasses.asdict(line),
        "allan": {
            "taus": list(spec.taus) if not isinstance(spec.taus, str) else spec.taus,
            "fit_min_tau": spec.fit_min_tau,
            "fit_max_tau": spec.fit_max_tau,
        },
        "record_metadata": {k: v for k, v in sorted(record.metadata.items())},
    }
    manifest = _manifest(args, "allan", snapshot, seed)
    path = write_curve(args.out, "allan", curve, args.format, predicted)
    manifest.add(path)
    summary = {
        "source": source,
        "fit": fit,
        "snr_bridge": snr,
        "sigma_over_predicted": [float(r) for r in ratios],
        "sigma_over_predicted_mean": float(np.mean(ratios)),
        "n_samples": int(record.samples.size),
        "tau0": record.tau0,
    }
    manifest.add(write_json(os.path.join(args.out, "allan_summary.json"), summary))
    if not args.no_plot:
        manifest.add(
            plots.save_allan(os.path.join(args.out, "allan.png"), curve, predicted)
        )
    manifest.write(started)
    slope_text = f"{fit['exponent']:+.3f}" if fit else "n/a"
    print(f"allan: {curve.taus.size} points, slope {slope_text} -> {args.out}")


_COMMANDS = {
    "fringe": cmd_fringe,
    "spectrum": cmd_spectrum,
    "snr": cmd_snr,
    "clock": cmd_clock,
    "allan": cmd_allan,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
