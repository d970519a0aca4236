"""Demodulation-based gradient/Hessian estimates and the Riccati filter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from etes.plant import Dither, MapParams


@dataclass(frozen=True)
class Gains:
    k: float
    omega_r: float

    def __post_init__(self):
        if not (self.k > 0.0 and math.isfinite(self.k)):
            raise ValueError("control gain k must be > 0")
        if not (self.omega_r > 0.0 and math.isfinite(self.omega_r)):
            raise ValueError("Riccati filter rate omega_r must be > 0")


@dataclass(frozen=True)
class Conditioning:
    """Front-end applied to the measured output before the controller uses it.

    ``washout_ratio`` sets a first-order high-pass on ``y`` (cutoff
    ``washout_ratio * omega``) that strips the unknown DC level ``Q*``.
    ``lowpass_ratio``/``lowpass_order`` set a cascade of identical first-order
    low-passes applied to both demodulated signals before they reach the
    trigger, the hold and the Riccati filter. Cutoffs scale with the dither
    frequency so the front-end belongs to the fast time scale.

    Either stage can be switched off with ``None``; ``Conditioning.raw()``
    gives the bare demodulation ``a sin(wt) y`` and ``-(8/a^2) cos(2wt) y``.
    """

    washout_ratio: Optional[float] = 0.1
    lowpass_ratio: Optional[float] = 0.09
    lowpass_order: int = 3

    def __post_init__(self):
        if self.washout_ratio is not None and not self.washout_ratio > 0.0:
            raise ValueError("washout_ratio must be > 0 or None")
        if self.lowpass_ratio is not None and not self.lowpass_ratio > 0.0:
            raise ValueError("lowpass_ratio must be > 0 or None")
        if self.lowpass_order < 1:
            raise ValueError("lowpass_order must be >= 1")

    @classmethod
    def raw(cls) -> "Conditioning":
        return cls(washout_ratio=None, lowpass_ratio=None, lowpass_order=1)

    @property
    def has_washout(self) -> bool:
        return self.washout_ratio is not None

    @property
    def n_lowpass(self) -> int:
        return 0 if self.lowpass_ratio is None else self.lowpass_order


def gradient_estimate(d: Dither, t: float, y: float) -> float:
    return d.amplitude * math.sin(d.omega * t) * y


def hessian_estimate(d: Dither, t: float, y: float) -> float:
    if d.amplitude == 0.0:
        raise ValueError("Hessian demodulation needs a nonzero dither amplitude")
    return -8.0 / (d.amplitude * d.amplitude) * math.cos(2.0 * d.omega * t) * y


def riccati_rhs(g: Gains, h_hat: float, gamma: float) -> float:
    """Right-hand side of the scalar Riccati filter for the Hessian inverse.

    Equilibria are 0 (repelling) and ``1/h_hat`` (attracting for a constant
    ``h_hat``).
    """
    return g.omega_r * gamma - g.omega_r * h_hat * gamma * gamma


def gamma_error(gamma: float, p: MapParams) -> float:
    # analysis side only: uses the true Hessian
    return gamma - 1.0 / p.h_star


def period_average(fn: Callable[[np.ndarray], np.ndarray], period: float,
                   panels: int = 4096) -> float:
    """Mean of a vectorised ``fn`` over ``[0, period]`` by composite Simpson."""
    if panels < 2 or panels % 2:
        raise ValueError("panels must be an even integer >= 2")
    t = np.linspace(0.0, period, panels + 1)
    return float(simpson(fn(t), x=t) / period)
