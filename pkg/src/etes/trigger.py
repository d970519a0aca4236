"""Static event trigger: held control, actuation error, event-time refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

from etes.estimators import Gains


class EventBracketError(ValueError):
    """Bisection was handed a bracket without the expected sign pattern."""


@dataclass(frozen=True)
class TriggerConfig:
    sigma: float = 0.9
    beta: float = 1.0
    refine_tol: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not self.refine_tol > 0.0:
            raise ValueError("refine_tol must be > 0")

    def satisfies_stability_margin(self, h_star: float) -> bool:
        """True when beta exceeds |H*| (needs ground truth)."""
        return self.beta > abs(h_star)


@dataclass(frozen=True)
class HoldState:
    """Zero-order-hold contents between two events."""

    t_k: float
    held_product: float
    u_k: float
    k: int = 0

    @classmethod
    def sample(cls, t: float, gamma: float, g_hat: float, gains: Gains,
               k: int = 0) -> "HoldState":
        prod = gamma * g_hat
        return cls(t, prod, held_control(gains, gamma, g_hat), k)

    def refresh(self, t: float, gamma: float, g_hat: float,
                gains: Gains) -> "HoldState":
        if t < self.t_k:
            raise ValueError("event times must be non-decreasing")
        return HoldState.sample(t, gamma, g_hat, gains, self.k + 1)


def held_control(g: Gains, gamma_k: float, g_hat_k: float) -> float:
    return -g.k * (gamma_k * g_hat_k)


def actuation_error(h: HoldState, gamma: float, g_hat: float) -> float:
    return h.held_product - gamma * g_hat


def trigger_value(cfg: TriggerConfig, g_hat: float, e: float) -> float:
    """``sigma|G| - beta|e|``; an event fires once this goes negative."""
    return cfg.sigma * abs(g_hat) - cfg.beta * abs(e)


def refine_event_time(bracket: Tuple[float, float],
                      xi_eval: Callable[[float], float], tol: float) -> float:
    """Locate ``inf{t : xi(t) < 0}`` inside ``bracket`` by bisection.

    Returns the right end of the final bracket, so the trigger is already
    negative at the returned instant and the true crossing lies at most
    ``tol`` before it.
    """
    lo, hi = bracket
    if not lo < hi:
        raise EventBracketError(f"empty bracket [{lo}, {hi}]")
    if xi_eval(lo) < 0.0:
        raise EventBracketError(f"trigger already negative at t={lo!r}")
    if not xi_eval(hi) < 0.0:
        raise EventBracketError(f"trigger not negative at t={hi!r}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # float resolution reached
        if xi_eval(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def peter_paul_coeffs(sigma: float, beta: float) -> Tuple[float, float]:
    """``(q, p)`` with ``sigma G^2 - beta|e||G| >= q G^2 - p e^2``."""
    return sigma / 2.0, beta * beta / (2.0 * sigma)


def min_dwell_time(a: float, k: float, h_star: float, sigma: float, beta: float,
                   omega_correction: float = 0.0) -> float:
    """Analytic lower bound on inter-event times of the averaged loop.

    ``omega_correction`` is the unquantified high-frequency correction; with
    the default 0 the bound is indicative only.
    """
    if h_star == 0.0:
        raise ValueError("h_star must be nonzero")
    for name, v in (("a", a), ("k", k), ("sigma", sigma), ("beta", beta)):
        if not v > 0.0:
            raise ValueError(f"{name} must be > 0")
    c = omega_correction
    if not 0.0 <= c < 1.0:
        raise ValueError("omega_correction must lie in [0, 1)")
    hmax = max(1.0 / abs(h_star), 1.0, abs(h_star))
    ratio = beta / sigma
    return 2.0 / (a * a * k * hmax) * ratio * ratio * (1.0 - c) / (1.0 + ratio - c)
