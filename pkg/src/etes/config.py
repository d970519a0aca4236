"""INI experiment files -> validated ``ExperimentSpec``.

Schema (section.key, default in brackets, no default means required)::

    [map]          q_star, h_star, theta_star
    [dither]       amplitude, omega
    [gains]        k, omega_r
    [trigger]      sigma [0.9], beta [1.0], refine_tol [1e-9]
    [run]          scheme [newton], extremum [max], theta_hat0, gamma0, t_end,
                   dt [period/200], record_stride [1], storm_cap [100*period/dt]
    [conditioning] enabled [true], washout_ratio [0.1], lowpass_ratio [0.09],
                   lowpass_order [3]
    [experiment]   mode [run], output_dir [out], emit_plots [true],
                   sweep_axis, sweep_values, window [0, t_end],
                   average_variant [nonlinear]
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

from etes.estimators import Conditioning, Gains
from etes.plant import Dither, MapParams
from etes.sim import VARIANTS, SimConfig
from etes.trigger import TriggerConfig

MODES = ("run", "compare", "sweep", "average")
SWEEP_AXES = ("omega", "a", "sigma", "beta")

REQUIRED = {
    "map": ("q_star", "h_star", "theta_star"),
    "dither": ("amplitude", "omega"),
    "gains": ("k", "omega_r"),
    "run": ("theta_hat0", "gamma0", "t_end"),
}
OPTIONAL = {
    "map": (),
    "dither": (),
    "gains": (),
    "trigger": ("sigma", "beta", "refine_tol"),
    "run": ("scheme", "extremum", "dt", "record_stride", "storm_cap"),
    "conditioning": ("enabled", "washout_ratio", "lowpass_ratio", "lowpass_order"),
    "experiment": ("mode", "output_dir", "emit_plots", "sweep_axis", "sweep_values",
                   "window", "average_variant"),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    base: SimConfig
    mode: str = "run"
    output_dir: Path = Path("out")
    emit_plots: bool = True
    sweep_axis: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    window: Optional[Tuple[float, float]] = None
    average_variant: str = "nonlinear"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"experiment.mode must be one of {MODES}, got {self.mode!r}")
        if (self.sweep_axis is not None) != (self.mode == "sweep"):
            raise ConfigError("experiment.sweep_axis is required for mode=sweep and only then")
        if self.mode == "sweep":
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(f"experiment.sweep_axis must be one of {SWEEP_AXES}")
            if not self.sweep_values or any(not v > 0.0 for v in self.sweep_values):
                raise ConfigError("experiment.sweep_values must be a non-empty list of positive numbers")
        if self.average_variant not in VARIANTS:
            raise ConfigError(f"experiment.average_variant must be one of {VARIANTS}")

    @property
    def analysis_window(self) -> Tuple[float, float]:
        return self.window if self.window is not None else (0.0, self.base.t_end)

    def sweep_configs(self) -> List[Tuple[float, SimConfig]]:
        out = []
        for v in self.sweep_values:
            b = self.base
            try:
                if self.sweep_axis == "omega":
                    cfg = b.replace(dither=Dither(b.dither.amplitude, v))
                elif self.sweep_axis == "a":
                    cfg = b.replace(dither=Dither(v, b.dither.omega))
                elif self.sweep_axis == "sigma":
                    cfg = b.replace(trigger=replace(b.trigger, sigma=v))
                else:
                    cfg = b.replace(trigger=replace(b.trigger, beta=v))
            except ValueError as exc:
                raise ConfigError(f"sweep value {self.sweep_axis}={v}: {exc}") from None
            out.append((v, cfg))
        return out


def _float(sec: configparser.SectionProxy, key: str, default=None) -> Optional[float]:
    if key not in sec:
        return default
    raw = sec[key].strip()
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{sec.name}.{key}: must be finite, got {raw!r}")
    return v


def _int(sec, key: str, default: Optional[int]) -> Optional[int]:
    if key not in sec:
        return default
    raw = sec[key].strip()
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: expected an integer, got {raw!r}") from None


def _bool(sec, key: str, default: bool) -> bool:
    if key not in sec:
        return default
    try:
        return sec.getboolean(key)
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: expected true/false, got {sec[key]!r}") from None


def _floats(sec, key: str) -> Tuple[float, ...]:
    if key not in sec:
        return ()
    try:
        return tuple(float(s) for s in sec[key].replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: expected a list of numbers, got {sec[key]!r}") from None


def _build(section: str, ctor, *args, **kwargs):
    try:
        return ctor(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def parse_config(text: str, source: str = "<string>") -> ExperimentSpec:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: unreadable config: {exc}") from None

    unknown = [s for s in cp.sections() if s not in OPTIONAL]
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    for name in cp.sections():
        allowed = set(REQUIRED.get(name, ())) | set(OPTIONAL[name])
        extra = sorted(set(cp[name]) - allowed)
        if extra:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(extra)}")
    missing = [f"{s}.{k}" for s, keys in REQUIRED.items() for k in keys
               if not (cp.has_section(s) and k in cp[s])]
    if missing:
        raise ConfigError("missing required parameter(s): " + ", ".join(missing))

    def sec(name):
        if not cp.has_section(name):
            cp.add_section(name)
        return cp[name]

    m, dth, gn, tr, rn, cd, ex = (sec(n) for n in
                                  ("map", "dither", "gains", "trigger", "run", "conditioning", "experiment"))
    mp = _build("map", MapParams, _float(m, "q_star"), _float(m, "h_star"), _float(m, "theta_star"))
    dither = _build("dither", Dither, _float(dth, "amplitude"), _float(dth, "omega"))
    gains = _build("gains", Gains, _float(gn, "k"), _float(gn, "omega_r"))
    trigger = _build("trigger", TriggerConfig, _float(tr, "sigma", 0.9), _float(tr, "beta", 1.0),
                     _float(tr, "refine_tol", 1e-9))
    if _bool(cd, "enabled", True):
        cond = _build("conditioning", Conditioning, _float(cd, "washout_ratio", 0.1),
                      _float(cd, "lowpass_ratio", 0.09), _int(cd, "lowpass_order", 3))
    else:
        cond = Conditioning.raw()
    base = _build(
        "run", SimConfig, mp, dither, gains, trigger,
        scheme=rn.get("scheme", "newton").strip(),
        extremum=rn.get("extremum", "max").strip(),
        theta_hat0=_float(rn, "theta_hat0"),
        gamma0=_float(rn, "gamma0"),
        dt=_float(rn, "dt"),
        t_end=_float(rn, "t_end"),
        record_stride=_int(rn, "record_stride", 1),
        conditioning=cond,
        storm_cap=_int(rn, "storm_cap", None),
    )

    window = _floats(ex, "window") or None
    if window is not None and (len(window) != 2 or not window[0] < window[1]):
        raise ConfigError("experiment.window: expected two increasing numbers 't0, t1'")
    axis = ex.get("sweep_axis")
    return ExperimentSpec(
        base=base,
        mode=ex.get("mode", "run").strip(),
        output_dir=Path(ex.get("output_dir", "out").strip()),
        emit_plots=_bool(ex, "emit_plots", True),
        sweep_axis=axis.strip() if axis else None,
        sweep_values=_floats(ex, "sweep_values"),
        window=window,
        average_variant=ex.get("average_variant", "nonlinear").strip(),
    )


def load_config(path) -> ExperimentSpec:
    """Read and validate an experiment file; raises ``ConfigError`` or ``OSError``."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return parse_config(text, source=str(p))


def override(spec: ExperimentSpec, **changes) -> ExperimentSpec:
    """Apply command-line overrides, dropping ``None`` values."""
    changes = {k: v for k, v in changes.items() if v is not None}
    if changes.get("mode") not in (None, "sweep") and spec.sweep_axis is not None:
        changes["sweep_axis"] = None
    try:
        return replace(spec, **changes)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

