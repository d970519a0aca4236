import math
from pathlib import Path

import numpy as np
import pytest

from etes import run_full
from etes.cli import (EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_ZENO, main)
from etes.config import ConfigError, load_config, parse_config
from etes.csvio import (fmt, read_events, read_metrics, read_trajectory, write_events,
                        write_trajectory)

from _shared import reference_config

ROOT = Path(__file__).resolve().parents[1]
SEC6 = ROOT / "configs" / "paper_sec6.cfg"

BASE = """
[map]
q_star = 7
h_star = -0.15
theta_star = 5
[dither]
amplitude = 0.1
omega = 3
[gains]
k = 18
omega_r = 1
[run]
theta_hat0 = 2
gamma0 = -0.1
t_end = {t_end}
{extra}
"""


def write_cfg(tmp_path, t_end=20.0, extra="", name="exp.cfg"):
    p = tmp_path / name
    p.write_text(BASE.format(t_end=t_end, extra=extra))
    return p


def test_shipped_config_matches_reference_parameters():
    spec = load_config(SEC6)
    b = spec.base
    assert (b.dither.amplitude, b.dither.omega, b.gains.k, b.gains.omega_r) == (0.1, 3.0, 18.0, 1.0)
    assert (b.trigger.sigma, b.theta_hat0, b.gamma0, b.t_end) == (0.9, 2.0, -0.1, 500.0)
    assert (b.map.q_star, b.map.h_star, b.map.theta_star) == (7.0, -0.15, 5.0)
    assert spec.mode == "compare"


def test_defaults_are_applied(tmp_path):
    b = load_config(write_cfg(tmp_path)).base
    assert b.step == pytest.approx(b.dither.period / 200.0)
    assert (b.trigger.sigma, b.trigger.beta, b.trigger.refine_tol) == (0.9, 1.0, 1e-9)
    assert b.scheme == "newton" and b.record_stride == 1


def test_empty_file_lists_required_map_parameters(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config("")
    msg = str(exc.value)
    for key in ("map.q_star", "map.h_star", "map.theta_star", "dither.omega", "run.t_end"):
        assert key in msg
    p = tmp_path / "empty.cfg"
    p.write_text("")
    assert main(["--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_sigma_outside_unit_interval_rejected(tmp_path):
    with pytest.raises(ConfigError, match=r"sigma must lie in \(0, 1\)"):
        parse_config(BASE.format(t_end=1, extra="[trigger]\nsigma = 1.2"))


@pytest.mark.parametrize("extra,match", [
    ("[trigger]\nbeta = -1", "beta"),
    ("[run2]\nx = 1", "unknown section"),
    ("[trigger]\nsgima = 0.5", "sgima"),
    ("[trigger]\nbeta = fast", "expected a number"),
    ("[experiment]\nmode = sweep", "sweep_axis"),
    ("[experiment]\nmode = sweep\nsweep_axis = omega\nsweep_values = 3, -1", "positive"),
    ("[experiment]\nwindow = 5, 1", "window"),
])
def test_invalid_keys_are_named(extra, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(BASE.format(t_end=1, extra=extra))


def test_csv_round_trip_is_lossless(tmp_path):
    traj, events = run_full(reference_config(t_end=30.0))
    write_trajectory(tmp_path / "t.csv", traj)
    write_events(tmp_path / "e.csv", events)
    back = read_trajectory(tmp_path / "t.csv")
    for name, col in zip(back, traj.columns()):
        assert np.array_equal(back[name], col + 0.0)
    ev = read_events(tmp_path / "e.csv")
    assert ev["t_k"].tolist() == events.event_times
    assert np.array_equal(ev["tau_k"][:-1], events.intervals) and math.isnan(ev["tau_k"][-1])
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "t,theta,y,g_hat,h_hat,gamma,u,e,xi"
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "k,t_k,tau_k"


def test_float_formatting():
    assert fmt(-0.0) == "0.0"
    assert fmt(0.1) == "0.1" and float(fmt(1 / 3)) == 1 / 3
    assert fmt(True) == "true" and fmt(3) == "3" and fmt(math.nan) == "nan"


def test_sub_step_horizon_gives_single_sample(tmp_path):
    out = tmp_path / "o"
    rc = main(["--config", str(write_cfg(tmp_path, t_end=0.001)), "--out", str(out), "--no-plots"])
    assert rc == EXIT_OK
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("0.0,2.0,")
    assert (out / "events.csv").read_text().splitlines()[1:] == ["0,0.0,nan"]
    assert read_metrics(out / "metrics.csv")["update_count"] == "0"


def test_plots_do_not_change_csv_bytes(tmp_path):
    cfg = write_cfg(tmp_path, t_end=40.0)
    main(["--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["--config", str(cfg), "--out", str(tmp_path / "b"), "--no-plots", "--seedless"])
    for name in ("trajectory.csv", "events.csv", "metrics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    svg = (tmp_path / "a" / "run.svg").read_text()
    assert svg.startswith("<?xml") and svg.count('id="axes_') == 4
    assert not (tmp_path / "b" / "run.svg").exists()
    main(["--config", str(cfg), "--out", str(tmp_path / "c")])
    assert (tmp_path / "c" / "run.svg").read_bytes() == (tmp_path / "a" / "run.svg").read_bytes()


def test_compare_mode_writes_both_schemes(tmp_path):
    out = tmp_path / "o"
    rc = main(["--config", str(write_cfg(tmp_path, t_end=150.0)), "--mode", "compare",
               "--out", str(out), "--no-plots"])
    assert rc == EXIT_OK
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("scheme,update_count,convergence_time_theta,max_abs_u")
    assert [ln.split(",")[0] for ln in lines[1:]] == ["newton", "gradient"]
    for scheme in ("newton", "gradient"):
        assert (out / scheme / "trajectory.csv").exists()


def test_sweep_and_average_modes(tmp_path):
    extra = "[experiment]\nmode = sweep\nsweep_axis = beta\nsweep_values = 0.5 1.0\n"
    out = tmp_path / "s"
    assert main(["--config", str(write_cfg(tmp_path, 30.0, extra)), "--out", str(out), "--no-plots"]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("beta,update_count") and len(rows) == 3
    assert (out / "beta_0.5" / "trajectory.csv").exists()
    out = tmp_path / "a"
    assert main(["--config", str(write_cfg(tmp_path, 30.0)), "--mode", "average", "--out", str(out)]) == 0
    assert (out / "average" / "trajectory.csv").exists() and (out / "average.svg").exists()
    assert "lyapunov_margin" in read_metrics(out / "metrics.csv")


def test_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    diverge = write_cfg(tmp_path, 5.0, "[conditioning]\nenabled = false", "d.cfg")
    assert main(["--config", str(diverge), "--out", out, "--no-plots"]) == EXIT_DIVERGENCE
    storm = write_cfg(tmp_path, 100.0, "storm_cap = 2", "z.cfg")
    assert main(["--config", str(storm), "--out", out, "--no-plots"]) == EXIT_ZENO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--config", str(write_cfg(tmp_path, 1.0)), "--out", str(blocker / "sub"),
                 "--no-plots"]) == EXIT_IO
    assert main(["--config", str(tmp_path / "missing.cfg")]) == EXIT_IO
    assert main([]) == EXIT_USAGE
    assert main(["--config", "x", "--mode", "fly"]) == EXIT_USAGE
    assert len({EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_ZENO, EXIT_IO}) == 6
