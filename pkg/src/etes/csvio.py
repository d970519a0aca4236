"""CSV writers and readers for trajectories, event logs and metric tables.

Floats are written with ``repr``, the shortest string that parses back to the
same double, so a write/read cycle is lossless and output bytes depend only on
the numbers.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from etes.sim import COLUMNS, EventLog, Trajectory

EVENT_HEADER = ("k", "t_k", "tau_k")
METRIC_HEADER = ("key", "value")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v + 0.0)  # fold -0.0 into 0.0
    return str(v)


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_trajectory(path, traj: Trajectory) -> None:
    cols = [c.tolist() for c in traj.columns()]
    _write(Path(path), COLUMNS, zip(*cols))


def read_trajectory(path) -> Dict[str, np.ndarray]:
    """Columns of a trajectory file keyed by header name."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected trajectory header {header}")
        data = [[float(x) for x in row] for row in r]
    arr = np.asarray(data, dtype=float).reshape(-1, len(COLUMNS))
    return {name: arr[:, i] for i, name in enumerate(COLUMNS)}


def event_rows(log: EventLog) -> List[Tuple[int, float, float]]:
    # tau_k is the time to the next event; the last event has none
    t = list(log.event_times)
    return [(k, tk, (t[k + 1] - tk) if k + 1 < len(t) else math.nan)
            for k, tk in enumerate(t)]


def write_events(path, log: EventLog) -> None:
    _write(Path(path), EVENT_HEADER, event_rows(log))


def read_events(path) -> Dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != EVENT_HEADER:
            raise ValueError(f"{path}: unexpected events header {header}")
        data = [[float(x) for x in row] for row in r]
    arr = np.asarray(data, dtype=float).reshape(-1, 3)
    return {"k": arr[:, 0].astype(int), "t_k": arr[:, 1], "tau_k": arr[:, 2]}


def write_metrics(path, items: Iterable[Tuple[str, object]]) -> None:
    _write(Path(path), METRIC_HEADER, items)


def read_metrics(path) -> Dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        if tuple(next(r)) != METRIC_HEADER:
            raise ValueError(f"{path}: unexpected metrics header")
        return {k: v for k, v in r}


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    _write(Path(path), header, rows)
