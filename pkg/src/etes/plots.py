"""Four-panel SVG summary drawn from the CSV files of one or more runs."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from etes.csvio import read_events, read_trajectory  # noqa: E402

STYLES = {"newton": "C0", "gradient": "C3", "full": "C0", "average": "C2"}


def plot_runs(run_dirs: Mapping[str, Path], out_path, theta_star: Optional[float] = None,
              gamma_star: Optional[float] = None) -> None:
    """Panels: theta(t), u(t), inter-event time stems, gamma(t).

    ``run_dirs`` maps a legend label to a directory holding ``trajectory.csv``
    and ``events.csv``. Output depends only on those files.
    """
    plt.rcParams["svg.hashsalt"] = "etes"
    fig, ax = plt.subplots(4, 1, figsize=(7.5, 9.0), sharex=True)
    for i, (label, d) in enumerate(run_dirs.items()):
        tr = read_trajectory(Path(d) / "trajectory.csv")
        ev = read_events(Path(d) / "events.csv")
        color = STYLES.get(label, f"C{i}")
        ax[0].plot(tr["t"], tr["theta"], color=color, lw=0.8, label=label)
        ax[1].step(tr["t"], tr["u"], where="post", color=color, lw=0.8, label=label)
        tk, tau = ev["t_k"], ev["tau_k"]
        ok = np.isfinite(tau)
        if np.any(ok):
            ml, sl, bl = ax[2].stem(tk[ok], tau[ok], linefmt=color, markerfmt=".", basefmt=" ",
                                    label=f"{label} ({len(tk) - 1} updates)")
            ml.set_color(color)
            ml.set_markersize(2)
            sl.set_linewidth(0.5)
        ax[3].plot(tr["t"], tr["gamma"], color=color, lw=0.8, label=label)
    if theta_star is not None:
        ax[0].axhline(theta_star, color="k", lw=0.6, ls="--")
    if gamma_star is not None:
        ax[3].axhline(gamma_star, color="k", lw=0.6, ls="--")
    for a, name in zip(ax, ("theta", "u", "tau_k", "gamma")):
        a.set_ylabel(name)
        a.grid(True, lw=0.3)
    ax[2].set_yscale("symlog", linthresh=1e-3)
    ax[0].legend(loc="lower right", fontsize=8)
    if ax[2].get_legend_handles_labels()[0]:
        ax[2].legend(loc="upper right", fontsize=8)
    ax[3].set_xlabel("t [s]")
    fig.tight_layout()
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_single(run_dir: Path, out_path, label: str, **kw) -> None:
    plot_runs({label: run_dir}, out_path, **kw)

