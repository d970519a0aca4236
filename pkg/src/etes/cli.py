"""Command-line driver: load an experiment file, run it, write CSV and SVG output."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from etes.analysis import Metrics, compute_metrics
from etes.config import MODES, ConfigError, ExperimentSpec, load_config, override
from etes.csvio import fmt, write_events, write_metrics, write_table, write_trajectory
from etes.sim import DivergenceError, EventLog, SimConfig, Trajectory, ZenoSuspicionError, run_average, run_full

log = logging.getLogger("etes")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DIVERGENCE = 4
EXIT_ZENO = 5
EXIT_IO = 6

COMPARE_HEADER = ("scheme", "update_count", "convergence_time_theta", "max_abs_u",
                  "min_dwell", "theta_at_end", "gamma_at_end")


def _save_run(d: Path, traj: Trajectory, events: EventLog, metrics: Optional[Metrics]) -> None:
    write_trajectory(d / "trajectory.csv", traj)
    write_events(d / "events.csv", events)
    if metrics is not None:
        write_metrics(d / "metrics.csv", metrics.rows())


def _run_one(cfg: SimConfig, spec: ExperimentSpec) -> Tuple[Trajectory, EventLog, Metrics]:
    traj, events = run_full(cfg)
    avg = run_average(cfg, spec.average_variant)
    return traj, events, compute_metrics(traj, events, cfg, avg, spec.analysis_window)


def _plot(spec: ExperimentSpec, dirs, name: str) -> None:
    if not spec.emit_plots:
        return
    from etes.plots import plot_runs

    p = spec.base.map
    plot_runs(dirs, spec.output_dir / name, theta_star=p.theta_star, gamma_star=1.0 / p.h_star)


def _mode_run(spec: ExperimentSpec) -> None:
    out = spec.output_dir
    traj, events, m = _run_one(spec.base, spec)
    _save_run(out, traj, events, m)
    _plot(spec, {spec.base.scheme: out}, "run.svg")
    log.info("%s: %d updates, theta(end)=%.6g", spec.base.scheme, m.update_count, traj.theta_hat[-1])


def _mode_compare(spec: ExperimentSpec) -> None:
    out = spec.output_dir
    rows, dirs = [], {}
    for scheme in ("newton", "gradient"):
        cfg = spec.base.replace(scheme=scheme)
        traj, events, m = _run_one(cfg, spec)
        _save_run(out / scheme, traj, events, m)
        dirs[scheme] = out / scheme
        rows.append((scheme, m.update_count, m.convergence_time_theta, m.max_abs_u,
                     m.min_dwell, float(traj.theta_hat[-1]), float(traj.gamma[-1])))
        log.info("%s: %d updates", scheme, m.update_count)
    write_table(out / "summary.csv", COMPARE_HEADER, rows)
    _plot(spec, dirs, "compare.svg")


def _mode_sweep(spec: ExperimentSpec) -> None:
    out, axis = spec.output_dir, spec.sweep_axis
    rows = []
    for value, cfg in spec.sweep_configs():
        d = out / f"{axis}_{fmt(value)}"
        traj, events, m = _run_one(cfg, spec)
        _save_run(d, traj, events, m)
        rows.append((value, m.update_count, m.convergence_time_theta, m.min_dwell,
                     m.tau_star, m.lyapunov_margin, m.averaging_sup_dev))
        log.info("%s=%s: %d updates, averaging deviation %.4g", axis, fmt(value),
                 m.update_count, m.averaging_sup_dev)
    write_table(out / "sweep.csv", (axis, "update_count", "convergence_time_theta", "min_dwell",
                                     "tau_star", "lyapunov_margin", "averaging_sup_dev"), rows)


def _mode_average(spec: ExperimentSpec) -> None:
    out, cfg = spec.output_dir, spec.base
    traj, events = run_full(cfg)
    avg_traj, avg_events = run_average(cfg, spec.average_variant)
    m = compute_metrics(traj, events, cfg, (avg_traj, avg_events), spec.analysis_window)
    _save_run(out / "full", traj, events, m)
    _save_run(out / "average", avg_traj, avg_events, None)
    write_metrics(out / "metrics.csv", m.rows())
    _plot(spec, {"full": out / "full", "average": out / "average"}, "average.svg")


MODE_HANDLERS = {"run": _mode_run, "compare": _mode_compare,
                 "sweep": _mode_sweep, "average": _mode_average}


def execute(spec: ExperimentSpec) -> int:
    """Run the experiment and map failures onto exit codes."""
    try:
        MODE_HANDLERS[spec.mode](spec)
    except DivergenceError as exc:
        log.error("divergence: %s", exc)
        return EXIT_DIVERGENCE
    except ZenoSuspicionError as exc:
        log.error("event storm: %s", exc)
        return EXIT_ZENO
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="etes", description=(
        "Simulate event-triggered Newton and gradient extremum seeking on a static quadratic map."))
    ap.add_argument("--config", required=True, help="experiment file (INI)")
    ap.add_argument("--mode", choices=MODES, help="override experiment.mode")
    ap.add_argument("--out", help="override experiment.output_dir")
    ap.add_argument("--no-plots", action="store_true", help="skip SVG output")
    ap.add_argument("--seedless", action="store_true",
                    help="accepted for scripting; runs use no random numbers either way")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        spec = load_config(args.config)
        spec = override(spec, mode=args.mode,
                        output_dir=Path(args.out) if args.out else None,
                        emit_plots=False if args.no_plots else None)
    except ConfigError as exc:
        log.error("config: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    return execute(spec)


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))
