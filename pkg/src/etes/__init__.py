"""Event-triggered extremum seeking for scalar static maps.

Newton-based (Riccati Hessian-inverse filter) and gradient-based schemes with a
static event trigger in the actuation path, an averaged-system oracle, and
post-run verification utilities.
"""

from etes.plant import Dither, MapParams, dither_signal, eval_map, plant_input
from etes.estimators import (
    Conditioning,
    Gains,
    gamma_error,
    gradient_estimate,
    hessian_estimate,
    period_average,
    riccati_rhs,
)
from etes.trigger import (
    EventBracketError,
    HoldState,
    TriggerConfig,
    actuation_error,
    held_control,
    min_dwell_time,
    peter_paul_coeffs,
    refine_event_time,
    trigger_value,
)
from etes.sim import (
    DivergenceError,
    EventLog,
    FullState,
    SimConfig,
    Trajectory,
    ZenoSuspicionError,
    closed_loop_rhs,
    initial_state,
    integrate_step,
    rk4_step,
    run_average,
    run_full,
)

__version__ = "0.1.0"
