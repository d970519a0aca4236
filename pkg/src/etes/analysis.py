"""Post-run checks over recorded trajectories: envelopes, decay, dwell, averaging."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from etes.plant import MapParams
from etes.sim import EventLog, SimConfig, Trajectory
from etes.trigger import min_dwell_time, peter_paul_coeffs


def update_count(log: EventLog) -> int:
    """Control refreshes after the initial sample at t=0."""
    return len(log.event_times) - 1


def _min_envelope_constant(dev: np.ndarray, t: np.ndarray, dev0: float,
                           rate: float, scale: float) -> float:
    # smallest C >= 0 with dev(t) <= exp(-rate t) dev0 + C scale at every sample
    excess = dev - np.exp(-rate * t) * dev0
    worst = float(np.max(excess)) if len(excess) else 0.0
    if not math.isfinite(worst):
        return math.inf
    return max(worst, 0.0) / scale


def theta_decay_rate(cfg: SimConfig) -> float:
    return (1.0 - cfg.trigger.sigma) * cfg.dither.amplitude ** 2 * cfg.gains.k / 2.0


def envelope_check_theta(traj: Trajectory, p: MapParams, cfg: SimConfig) -> Tuple[bool, float]:
    """Fit ``|theta - theta*| <= exp(-lam t)|theta(0) - theta*| + C (a + 1/w)``."""
    dev = np.abs(traj.theta - p.theta_star)
    a, w = cfg.dither.amplitude, cfg.dither.omega
    c = _min_envelope_constant(dev, traj.t, dev[0], theta_decay_rate(cfg), a + 1.0 / w)
    return math.isfinite(c), c


def envelope_check_y(traj: Trajectory, p: MapParams, cfg: SimConfig) -> Tuple[bool, float]:
    """Fit ``|y - Q*| <= exp(-lam t)|y(0) - Q*| + C (a^2 + 1/w^2)``."""
    dev = np.abs(traj.y - p.q_star)
    a, w = cfg.dither.amplitude, cfg.dither.omega
    c = _min_envelope_constant(dev, traj.t, dev[0], theta_decay_rate(cfg), a * a + 1.0 / w ** 2)
    return math.isfinite(c), c


def envelope_check_gamma(traj: Trajectory, p: MapParams, cfg: SimConfig) -> Tuple[bool, float]:
    """Fit ``|gamma - 1/H*| <= exp(-w_r t)|gamma(0) - 1/H*| + C / w``."""
    dev = np.abs(traj.gamma - 1.0 / p.h_star)
    c = _min_envelope_constant(dev, traj.t, dev[0], cfg.gains.omega_r, 1.0 / cfg.dither.omega)
    return math.isfinite(c), c


def event_rows(traj: Trajectory, log: EventLog) -> Tuple[np.ndarray, np.ndarray]:
    """Row indices of the left limit and the post-refresh sample of each event after t=0."""
    times = np.asarray(log.event_times[1:], dtype=float)
    pre = np.searchsorted(traj.t, times, side="left")
    if len(pre) and (pre[-1] + 1 >= len(traj.t) or np.any(traj.t[pre] != times)
                     or np.any(traj.t[pre + 1] != times)):
        raise ValueError("trajectory does not contain both samples of every event")
    return pre, pre + 1


def lyapunov_decay_check(avg_traj: Trajectory, avg_log: EventLog, cfg: SimConfig) -> float:
    """Worst ratio ``V(t) / (V(t_k) exp(-(1-sigma) a^2 K (t - t_k)))`` with ``V = G^2``.

    Values at or below 1 mean the exponential decay bound holds on every
    inter-event segment.
    """
    rate = 2.0 * theta_decay_rate(cfg)
    t = avg_traj.t
    v = avg_traj.g_hat ** 2
    ev = np.asarray(avg_log.event_times, dtype=float)
    seg = np.searchsorted(ev, t, side="right") - 1
    start_idx = np.searchsorted(t, ev, side="left")
    v_k = v[start_idx][seg]
    t_k = ev[seg]
    bound = v_k * np.exp(-rate * (t - t_k))
    live = bound > 0.0
    if not np.any(live):
        return 1.0 if np.all(v == 0.0) else math.inf
    return float(np.max(v[live] / bound[live]))


def _strictly_increasing(t: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # collapse duplicated event instants, keeping the last sample at each time
    keep = np.append(t[1:] != t[:-1], True)
    return t[keep], x[keep]


def averaging_deviation(full: Trajectory, avg: Trajectory, window: Tuple[float, float],
                        theta_star: float) -> float:
    """``sup (|theta_tilde_full| - |theta_tilde_av|)^+`` over ``window``.

    The average trajectory is linearly interpolated onto the full samples.
    """
    t0, t1 = window
    if not t0 < t1:
        raise ValueError("window must satisfy t0 < t1")
    lo = max(t0, full.t[0], avg.t[0])
    hi = min(t1, full.t[-1], avg.t[-1])
    if not lo <= hi:
        raise ValueError(f"window [{t0}, {t1}] does not overlap both trajectories")
    ta, xa = _strictly_increasing(avg.t, avg.theta_hat - theta_star)
    sel = (full.t >= lo) & (full.t <= hi)
    tf = full.t[sel]
    dev = np.abs(full.theta_hat[sel] - theta_star) - np.abs(np.interp(tf, ta, xa))
    return float(max(np.max(dev), 0.0)) if len(dev) else 0.0


class DwellStats(NamedTuple):
    min: float
    mean: float
    violates_bound: bool


def dwell_stats(log: EventLog, tau_star: float) -> DwellStats:
    """Min and mean inter-event time; NaN when the log has no interval.

    ``violates_bound`` is advisory: the analytic bound omits a high-frequency
    correction, so a short interval is a warning rather than an error.
    """
    tau = log.intervals
    if len(tau) == 0:
        return DwellStats(math.nan, math.nan, False)
    lo = float(np.min(tau))
    return DwellStats(lo, float(np.mean(tau)), lo < tau_star)


def convergence_time(traj: Trajectory, theta_star: float, band: float) -> float:
    """First time after which ``|theta - theta*| <= band`` holds to the end; NaN if never."""
    out = np.abs(traj.theta - theta_star) > band
    if not np.any(out):
        return float(traj.t[0])
    last = int(np.flatnonzero(out)[-1])
    if last == len(traj.t) - 1:
        return math.nan
    return float(traj.t[last + 1])


def phi_at_events(avg_traj: Trajectory, log: EventLog, cfg: SimConfig) -> Tuple[np.ndarray, np.ndarray]:
    """``sqrt(p/q)|e|/|G|`` just before and just after each event.

    The trigger fires when this ratio reaches 1, and a refresh resets it to 0.
    """
    q, p = peter_paul_coeffs(cfg.trigger.sigma, cfg.trigger.beta)
    pre, post = event_rows(avg_traj, log)
    scale = math.sqrt(p / q)
    g = np.abs(avg_traj.g_hat)
    e = np.abs(avg_traj.e)
    with np.errstate(divide="ignore", invalid="ignore"):
        return scale * e[pre] / g[pre], scale * e[post] / g[post]


@dataclass
class Metrics:
    update_count: int
    min_dwell: float
    mean_dwell: float
    tau_star: float
    convergence_time_theta: float
    steady_residual_theta: float
    steady_residual_gamma: float
    lyapunov_margin: float = math.nan
    averaging_sup_dev: float = math.nan
    dwell_below_tau_star: bool = False
    envelope_c_theta: float = math.nan
    envelope_c_y: float = math.nan
    envelope_c_gamma: float = math.nan
    max_abs_u: float = math.nan
    beta_exceeds_hessian: bool = False

    def rows(self) -> List[Tuple[str, object]]:
        return list(asdict(self).items())


def compute_metrics(traj: Trajectory, log: EventLog, cfg: SimConfig,
                    avg: Optional[Tuple[Trajectory, EventLog]] = None,
                    window: Optional[Tuple[float, float]] = None) -> Metrics:
    """Summary of one full run; average-run metrics are filled when ``avg`` is given."""
    p, d, trig = cfg.map, cfg.dither, cfg.trigger
    tau_star = min_dwell_time(d.amplitude, cfg.gains.k, p.h_star, trig.sigma, trig.beta)
    dw = dwell_stats(log, tau_star)
    tail = traj.t >= 0.9 * traj.t[-1]
    m = Metrics(
        update_count=update_count(log),
        min_dwell=dw.min,
        mean_dwell=dw.mean,
        tau_star=tau_star,
        convergence_time_theta=convergence_time(traj, p.theta_star, 3.0 * d.amplitude),
        steady_residual_theta=float(np.max(np.abs(traj.theta[tail] - p.theta_star))),
        steady_residual_gamma=float(abs(traj.gamma[-1] - 1.0 / p.h_star)),
        dwell_below_tau_star=dw.violates_bound,
        envelope_c_theta=envelope_check_theta(traj, p, cfg)[1],
        envelope_c_y=envelope_check_y(traj, p, cfg)[1],
        envelope_c_gamma=envelope_check_gamma(traj, p, cfg)[1],
        max_abs_u=float(np.max(np.abs(traj.u))),
        beta_exceeds_hessian=trig.satisfies_stability_margin(p.h_star),
    )
    if avg is not None:
        avg_traj, avg_log = avg
        m.lyapunov_margin = lyapunov_decay_check(avg_traj, avg_log, cfg)
        win = window if window is not None else (0.0, float(traj.t[-1]))
        if win[0] < win[1]:
            m.averaging_sup_dev = averaging_deviation(traj, avg_traj, win, p.theta_star)
    return m
