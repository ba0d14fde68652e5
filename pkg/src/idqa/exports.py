"""Plain-text tab-delimited exports with documented headers.

Every file starts with an optional timestamp comment (disable for
byte-identical reruns), then a '#'-prefixed header naming the columns.
Floats are written with repr-style shortest round-trip formatting.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone

import numpy as np

from .analysis import GroupSeries, SweepRow
from .dynamics import Trajectory
from .schedule import eval_curves, eval_path


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_table(path, columns, rows, *, timestamp: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        fh.write("# " + "\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(x) for x in row) + "\n")


def write_trajectory(path, traj: Trajectory, *, amplitudes: bool = False,
                     timestamp: bool = True) -> None:
    """Rows of (time, s, A, B, norm) plus either amplitudes or nothing.

    With ``amplitudes`` the row continues with re/im interleaved values for
    every basis state, ordered by basis index.
    """
    s_vals = eval_path(traj.path, traj.times)
    a_vals, b_vals = eval_curves(traj.curves, s_vals)
    s_vals = np.atleast_1d(s_vals)
    a_vals = np.atleast_1d(a_vals)
    b_vals = np.atleast_1d(b_vals)
    cols = ["time", "s", "A", "B", "norm"]
    if amplitudes:
        for i in range(traj.model.dim):
            cols += [f"re_{i}", f"im_{i}"]
    rows = []
    for k in range(traj.times.size):
        row = [traj.times[k], s_vals[k], a_vals[k], b_vals[k], traj.norms[k]]
        if amplitudes:
            for z in traj.amplitudes[k]:
                row += [z.real, z.imag]
        rows.append(row)
    write_table(path, cols, rows, timestamp=timestamp)


def write_ps_pc_series(path, traj: Trajectory, partition, *,
                       timestamp: bool = True) -> None:
    from .analysis import ps_pc

    rows = []
    for k in range(traj.times.size):
        ps, pc, ratio = ps_pc(traj.state(k), partition)
        rows.append([traj.times[k], ps, pc, ratio])
    write_table(path, ["time", "P_s", "P_c", "ratio"], rows, timestamp=timestamp)


def write_group_series(path, series: GroupSeries, *, timestamp: bool = True) -> None:
    labels = ["CL", "E1", "E2", "E3", "ISO"]
    rows = [
        [series.times[k]] + [series.values[lab][k] for lab in labels]
        for k in range(series.times.size)
    ]
    write_table(path, ["time"] + labels, rows, timestamp=timestamp)


def write_sweep(path, rows: list[SweepRow], *, timestamp: bool = True) -> None:
    cols = ["tau_anneal", "tau_pause", "s_pause", "P_s", "P_c", "ratio",
            "final_norm", "status"]
    data = [[r.tau_anneal, r.tau_pause, r.s_pause, r.ps, r.pc, r.ratio,
             r.final_norm, r.status] for r in rows]
    write_table(path, cols, data, timestamp=timestamp)


def write_gap_grid(path, s_values, gap_matrix, *, timestamp: bool = True) -> None:
    k = gap_matrix.shape[1]
    cols = ["s"] + [f"gap_{a}" for a in range(1, k + 1)]
    rows = [[s_values[r]] + list(gap_matrix[r]) for r in range(len(s_values))]
    write_table(path, cols, rows, timestamp=timestamp)
