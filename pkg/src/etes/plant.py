"""Static quadratic map and the sinusoidal probing signal."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class MapParams:
    """Quadratic map ``Q* + (H*/2)(theta - theta*)^2``.

    Ground truth: the simulator and the analysis code see these values, the
    controller path never does.
    """

    q_star: float
    h_star: float
    theta_star: float

    def __post_init__(self):
        for name in ("q_star", "h_star", "theta_star"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.h_star == 0.0:
            raise ValueError("h_star must be nonzero")

    @property
    def is_maximum(self) -> bool:
        return self.h_star < 0.0


@dataclass(frozen=True)
class Dither:
    amplitude: float
    omega: float

    def __post_init__(self):
        if not (self.amplitude > 0.0 and math.isfinite(self.amplitude)):
            raise ValueError("dither amplitude must be > 0")
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ValueError("dither omega must be > 0")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


def eval_map(p: MapParams, theta: float) -> float:
    d = theta - p.theta_star
    return p.q_star + 0.5 * p.h_star * d * d


def dither_signal(d: Dither, t: float) -> float:
    return d.amplitude * math.sin(d.omega * t)


def plant_input(theta_hat: float, d: Dither, t: float) -> float:
    """Map input: the current estimate plus the probing signal."""
    return theta_hat + dither_signal(d, t)
