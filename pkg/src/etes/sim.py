"""Fixed-step RK4 closed loop with event detection, plus the averaged oracle.

Both the full loop and the averaged loop run through the same hybrid stepper:
the continuous state is advanced with classical RK4 while the held control is
frozen, the trigger is evaluated at every step end, and a sign change is
located by bisection inside the offending step before the hold is refreshed.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from etes.estimators import Conditioning, Gains
from etes.plant import Dither, MapParams
from etes.trigger import HoldState, TriggerConfig, refine_event_time

log = logging.getLogger(__name__)

SCHEMES = ("newton", "gradient")
EXTREMA = ("max", "min")
VARIANTS = ("nonlinear", "linearized")
COLUMNS = ("t", "theta", "y", "g_hat", "h_hat", "gamma", "u", "e", "xi")


class DivergenceError(RuntimeError):
    pass


class ZenoSuspicionError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    map: MapParams
    dither: Dither
    gains: Gains
    trigger: TriggerConfig = TriggerConfig()
    scheme: str = "newton"
    theta_hat0: float = 0.0
    gamma0: float = -0.1
    dt: Optional[float] = None  # None: period / 200
    t_end: float = 100.0
    record_stride: int = 1
    conditioning: Conditioning = Conditioning()
    extremum: str = "max"
    storm_cap: Optional[int] = None  # None: 100 * period / dt events per period
    divergence_bound: float = 1e8

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.extremum not in EXTREMA:
            raise ValueError(f"extremum must be one of {EXTREMA}, got {self.extremum!r}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        if self.dt is not None:
            if not self.dt > 0.0:
                raise ValueError("dt must be > 0")
            if self.dt > self.dither.period / 50.0:
                raise ValueError(
                    f"dt={self.dt} does not resolve the dither; need dt <= period/50 "
                    f"= {self.dither.period / 50.0}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if not math.isfinite(self.theta_hat0):
            raise ValueError("theta_hat0 must be finite")
        if self.scheme == "newton":
            if self.gamma0 == 0.0 or not math.isfinite(self.gamma0):
                raise ValueError("gamma0 must be finite and nonzero: 0 is a Riccati equilibrium")
            if (self.gamma0 < 0.0) != (self.extremum == "max"):
                warnings.warn(
                    f"gamma0={self.gamma0} has the wrong sign for a declared {self.extremum}imum; "
                    "the Riccati filter will settle in the wrong basin", stacklevel=3)

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else self.dither.period / 200.0

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.step + 1e-9))

    @property
    def gradient_sign(self) -> float:
        """Fixed stand-in for the Hessian inverse in the gradient scheme."""
        return -1.0 if self.extremum == "max" else 1.0

    @property
    def event_cap(self) -> int:
        if self.storm_cap is not None:
            return self.storm_cap
        return int(math.ceil(100.0 * self.dither.period / self.step))

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class FullState:
    t: float
    theta_hat: float
    gamma: float
    hold: HoldState
    aux: Tuple[float, ...] = ()  # washout and low-pass filter states

    def vector(self) -> Tuple[float, ...]:
        return (self.theta_hat, self.gamma) + tuple(self.aux)


@dataclass
class Trajectory:
    """Recorded samples; at an event both the left and right limits are kept."""

    t: np.ndarray
    theta: np.ndarray
    y: np.ndarray
    g_hat: np.ndarray
    h_hat: np.ndarray
    gamma: np.ndarray
    u: np.ndarray
    e: np.ndarray
    xi: np.ndarray
    theta_hat: np.ndarray

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Trajectory":
        arr = np.asarray(rows, dtype=float).reshape(-1, len(COLUMNS) + 1)
        return cls(*(arr[:, i].copy() for i in range(arr.shape[1])))

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> List[np.ndarray]:
        return [getattr(self, c) for c in COLUMNS]

    def theta_tilde(self, theta_star: float) -> np.ndarray:
        return self.theta_hat - theta_star

    def value_at(self, name: str, t: float) -> float:
        """Last recorded value of column ``name`` at or before ``t``."""
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        if i < 0:
            raise ValueError(f"t={t} precedes the trajectory")
        return float(getattr(self, name)[i])


@dataclass
class EventLog:
    event_times: List[float] = field(default_factory=lambda: [0.0])

    @property
    def intervals(self) -> np.ndarray:
        return np.diff(np.asarray(self.event_times, dtype=float))

    def __len__(self) -> int:
        return len(self.event_times)


def rk4_step(f: Callable, t: float, x: Sequence[float], h: float, *args) -> Tuple[float, ...]:
    k1 = f(t, x, *args)
    x2 = [xi + 0.5 * h * ki for xi, ki in zip(x, k1)]
    k2 = f(t + 0.5 * h, x2, *args)
    x3 = [xi + 0.5 * h * ki for xi, ki in zip(x, k2)]
    k3 = f(t + 0.5 * h, x3, *args)
    x4 = [xi + h * ki for xi, ki in zip(x, k3)]
    k4 = f(t + h, x4, *args)
    h6 = h / 6.0
    return tuple(xi + h6 * (a + 2.0 * b + 2.0 * c + d)
                 for xi, a, b, c, d in zip(x, k1, k2, k3, k4))


class _Model(NamedTuple):
    x0: Tuple[float, ...]
    rhs: Callable  # (t, x, held_product) -> derivative
    observe: Callable  # (t, x) -> (g_hat, gamma)
    row: Callable  # (t, x, u, e, xi) -> trajectory row


def _full_model(cfg: SimConfig) -> _Model:
    p, d, g = cfg.map, cfg.dither, cfg.gains
    a, w = d.amplitude, d.omega
    q, hs, ts = p.q_star, p.h_star, p.theta_star
    k, wr = g.k, g.omega_r
    cond = cfg.conditioning
    wh = cond.washout_ratio * w if cond.has_washout else None
    n = cond.n_lowpass
    wl = cond.lowpass_ratio * w if n else 0.0
    newton = cfg.scheme == "newton"
    hdemod = -8.0 / (a * a)
    i_h = 3 if wh is not None else 2
    i_g = i_h + n
    sin, cos = math.sin, math.cos

    def rhs(t, x, held):
        s = sin(w * t)
        dth = x[0] + a * s - ts
        y = q + 0.5 * hs * dth * dth
        out = [-k * held, 0.0]
        if wh is not None:
            r = y - x[2]
            out.append(wh * r)
        else:
            r = y
        h_c = hdemod * cos(2.0 * w * t) * r
        if n:
            prev = h_c
            for j in range(i_h, i_g):
                out.append(wl * (prev - x[j]))
                prev = x[j]
            h_c = prev
            prev = a * s * r
            for j in range(i_g, i_g + n):
                out.append(wl * (prev - x[j]))
                prev = x[j]
        if newton:
            gm = x[1]
            out[1] = wr * gm - wr * h_c * gm * gm
        return out

    def signals(t, x):
        s = sin(w * t)
        theta = x[0] + a * s
        dth = theta - ts
        y = q + 0.5 * hs * dth * dth
        if n:
            return theta, y, x[i_g + n - 1], x[i_g - 1]
        r = y - x[2] if wh is not None else y
        return theta, y, a * s * r, hdemod * cos(2.0 * w * t) * r

    def observe(t, x):
        if n:
            return x[i_g + n - 1], x[1]
        return signals(t, x)[2], x[1]

    def row(t, x, u, e, xi):
        theta, y, g_c, h_c = signals(t, x)
        return (t, theta, y, g_c, h_c, x[1], u, e, xi, x[0])

    y0 = q + 0.5 * hs * (cfg.theta_hat0 - ts) ** 2
    gamma0 = cfg.gamma0 if newton else cfg.gradient_sign
    x0 = [cfg.theta_hat0, gamma0]
    if wh is not None:
        x0.append(y0)  # washout starts on the first measurement
    x0 += [1.0 / gamma0 if newton else 0.0] * n  # Hessian prior implied by gamma0
    x0 += [0.0] * n
    return _Model(tuple(x0), rhs, observe, row)


def _average_model(cfg: SimConfig, variant: str) -> _Model:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    p, d, g = cfg.map, cfg.dither, cfg.gains
    a, hs, ts = d.amplitude, p.h_star, p.theta_star
    k, wr = g.k, g.omega_r
    c = 0.5 * a * a * k
    newton = cfg.scheme == "newton"
    if variant == "linearized" and not newton:
        raise ValueError("the linearized average is defined for the Newton scheme only")
    inv_h = 1.0 / hs

    if variant == "nonlinear":
        def gamma_of(x):
            return x[2]

        def rhs(t, x, held):
            gm = x[2]
            e = held - gm * x[0]
            dgm = wr * gm - wr * hs * gm * gm if newton else 0.0
            return (-c * hs * gm * x[0] - c * hs * e,
                    -c * gm * hs * x[1] - k * e,
                    dgm)
    else:
        # third state is the Hessian-inverse error, gamma - 1/H*
        def gamma_of(x):
            return x[2] + inv_h

        def rhs(t, x, held):
            e = held - (x[2] + inv_h) * x[0]
            return (-c * x[0] - c * hs * e,
                    -c * x[1] - k * e,
                    -wr * x[2])

    def observe(t, x):
        return x[0], gamma_of(x)

    def row(t, x, u, e, xi):
        theta = ts + x[1]
        y = p.q_star + 0.5 * hs * x[1] * x[1]
        return (t, theta, y, x[0], hs, gamma_of(x), u, e, xi, theta)

    tt0 = cfg.theta_hat0 - ts
    gm0 = cfg.gamma0 if newton else cfg.gradient_sign
    x0 = (0.5 * a * a * hs * tt0, tt0, gm0 - inv_h if variant == "linearized" else gm0)
    return _Model(x0, rhs, observe, row)


def _check_finite(t: float, x: Sequence[float], bound: float) -> None:
    for v in x:
        if not (math.isfinite(v) and abs(v) < bound):
            raise DivergenceError(
                f"state diverged at t={t:.6g}: theta_hat={x[0]:.6g}, gamma/Ghat={x[1]:.6g}")


def _simulate(model: _Model, cfg: SimConfig, stride: int) -> Tuple[Trajectory, EventLog]:
    sigma, beta, tol = cfg.trigger.sigma, cfg.trigger.beta, cfg.trigger.refine_tol
    gains = cfg.gains
    dt, n_steps = cfg.step, cfg.n_steps
    period, cap, bound = cfg.dither.period, cfg.event_cap, cfg.divergence_bound
    rhs, observe, row = model.rhs, model.observe, model.row

    t = 0.0
    x = model.x0
    g, gm = observe(t, x)
    hold = HoldState.sample(0.0, gm, g, gains)
    held, u = hold.held_product, hold.u_k + 0.0
    rows = [row(t, x, u, held - gm * g, sigma * abs(g))]
    events = [0.0]
    recent: deque = deque()

    def fire(t_ev, x_ev):
        nonlocal hold, held, u
        g, gm = observe(t_ev, x_ev)
        e_pre = held - gm * g
        rows.append(row(t_ev, x_ev, u, e_pre, sigma * abs(g) - beta * abs(e_pre)))
        hold = hold.refresh(t_ev, gm, g, gains)
        held, u = hold.held_product, hold.u_k + 0.0
        events.append(t_ev)
        rows.append(row(t_ev, x_ev, u, held - gm * g, sigma * abs(g)))
        recent.append(t_ev)
        while recent[0] < t_ev - period:
            recent.popleft()
        if len(recent) > cap:
            raise ZenoSuspicionError(
                f"{len(recent)} events within one dither period ending at t={t_ev:.6g} "
                f"(cap {cap})")

    def xi_of(tau, xs, hp):
        gg, gmm = observe(tau, xs)
        return sigma * abs(gg) - beta * abs(hp - gmm * gg)

    # The trigger is monitored once per step. A violation at the step end is
    # located by bisection; after the refresh the step is finished and the
    # trigger checked again at the grid point only, so at most two events fall
    # in one step and bursts near zero crossings of the gradient stay bounded.
    for n in range(n_steps):
        t_grid = (n + 1) * dt
        x_new = rk4_step(rhs, t, x, dt, held)
        _check_finite(t_grid, x_new, bound)
        if xi_of(t_grid, x_new, held) < 0.0:
            t0, x0, held0 = t, x, held
            t_ev = refine_event_time(
                (t0, t_grid),
                lambda tau: xi_of(tau, x0 if tau == t0 else rk4_step(rhs, t0, x0, tau - t0, held0), held0),
                tol)
            if t_ev < t_grid:
                x_ev = rk4_step(rhs, t0, x0, t_ev - t0, held0)
                fire(t_ev, x_ev)
                x_new = rk4_step(rhs, t_ev, x_ev, t_grid - t_ev, held)
                _check_finite(t_grid, x_new, bound)
                if xi_of(t_grid, x_new, held) < 0.0:
                    fire(t_grid, x_new)
            else:
                fire(t_grid, x_new)
        x, t = x_new, t_grid
        if (n + 1) % stride == 0 or n == n_steps - 1:
            g, gm = observe(t, x)
            e = held - gm * g
            rows.append(row(t, x, u, e, sigma * abs(g) - beta * abs(e)))

    log.debug("simulated %d steps, %d events", n_steps, len(events) - 1)
    return Trajectory.from_rows(rows), EventLog(events)


def run_full(cfg: SimConfig) -> Tuple[Trajectory, EventLog]:
    """Simulate the sampled-data loop from t=0 to ``t_end``.

    Raises ``DivergenceError`` when the state leaves ``divergence_bound`` and
    ``ZenoSuspicionError`` when more than ``event_cap`` events land inside one
    dither period.
    """
    return _simulate(_full_model(cfg), cfg, cfg.record_stride)


def run_average(cfg: SimConfig, variant: str = "nonlinear",
                record_stride: Optional[int] = None) -> Tuple[Trajectory, EventLog]:
    """Simulate the period-averaged loop in original time.

    The averaged gradient starts consistent with the map,
    ``G_av(0) = (a^2 H*/2) theta_tilde(0)``, and the averaged trigger uses the
    same ``sigma`` and ``beta``. In the returned trajectory ``theta`` and
    ``theta_hat`` both hold ``theta* + theta_tilde_av`` and ``h_hat`` holds
    ``H*``.
    """
    stride = cfg.record_stride if record_stride is None else record_stride
    return _simulate(_average_model(cfg, variant), cfg, stride)


def initial_state(cfg: SimConfig) -> FullState:
    model = _full_model(cfg)
    x = model.x0
    g, gm = model.observe(0.0, x)
    return FullState(0.0, x[0], x[1], HoldState.sample(0.0, gm, g, cfg.gains), tuple(x[2:]))


def closed_loop_rhs(state: FullState, cfg: SimConfig) -> Tuple[float, float]:
    """``(d theta_hat/dt, d gamma/dt)`` of the full loop with the hold frozen."""
    d = _full_model(cfg).rhs(state.t, state.vector(), state.hold.held_product)
    return d[0], d[1]


def integrate_step(state: FullState, cfg: SimConfig, h: Optional[float] = None) -> FullState:
    """One RK4 step of length ``h`` (default ``cfg.step``); the hold is not refreshed."""
    h = cfg.step if h is None else h
    if not h > 0.0:
        raise ValueError("step must be > 0")
    x = rk4_step(_full_model(cfg).rhs, state.t, state.vector(), h, state.hold.held_product)
    _check_finite(state.t + h, x, cfg.divergence_bound)
    return FullState(state.t + h, x[0], x[1], state.hold, tuple(x[2:]))
