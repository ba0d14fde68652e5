"""Fair-sampling observables and probability-transfer analysis.

Covers the isolated/clustered ground-state probabilities and their ratio,
pause sweeps over the hold fraction, probability changes across a pause
window in the z- or instantaneous eigenbasis, aggregation by core-spin
magnetization, bridge-eigenstate detection, and the smoothing/outlier
utilities used on exported series.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsParams, StateVector, Trajectory, integrate
from .errors import ValidationError
from .ising import SIGNATURE_CORE, IsingModel, build_quantum_signature, classical_spectrum
from .schedule import ScheduleCurves, linear_path, make_pause_path
from .spectral import EigenSystem, eigen_overlaps

#: Aggregation labels keyed by core magnetization 2, 1, 0, -1, -2.
GROUP_LABELS = ("CL", "E1", "E2", "E3", "ISO")


@dataclass(frozen=True)
class GroundStatePartition:
    """Clustered ground set C (core spins up) and the isolated state S (all down)."""

    clustered: frozenset[int]
    isolated: int

    def __post_init__(self):
        if not self.clustered:
            raise ValidationError("clustered set must be non-empty")
        if self.isolated in self.clustered:
            raise ValidationError("isolated state cannot be in the clustered set")

    def core_mask(self) -> int:
        """Bits set in every clustered member; for the signature model, the core."""
        mask = -1
        for state in self.clustered:
            mask &= state
        return mask


def ground_state_partition(model: IsingModel, core=SIGNATURE_CORE) -> GroundStatePartition:
    """Split the classical ground states into the core-up cluster and all-down S."""
    spec = classical_spectrum(model)
    core_mask = 0
    for b in core:
        if not 0 <= b < model.n:
            raise ValidationError(f"core spin {b} out of range for n={model.n}")
        core_mask |= 1 << b
    clustered = frozenset(g for g in spec.ground_states if g & core_mask == core_mask)
    if 0 not in spec.ground_states:
        raise ValidationError("all-down state is not a classical ground state")
    return GroundStatePartition(clustered=clustered, isolated=0)


def signature_partition() -> GroundStatePartition:
    return ground_state_partition(build_quantum_signature())


def ps_pc(state: StateVector, partition: GroundStatePartition) -> tuple[float, float, float]:
    """(P_s, P_c, P_s/P_c): isolated probability, mean clustered probability, ratio.

    The ratio is +inf when P_c is zero (encoded, not an error).
    """
    p = state.probabilities()
    members = sorted(partition.clustered)
    pc = float(np.mean(p[members]))
    ps = float(p[partition.isolated])
    ratio = ps / pc if pc > 0.0 else math.inf
    return ps, pc, ratio


def core_magnetization(state: int, core=SIGNATURE_CORE) -> float:
    """Half the sum of sigma^z over the core spins."""
    total = 0
    for b in core:
        total += 1 if (state >> b) & 1 else -1
    return total / 2.0


def group_label(state: int, core=SIGNATURE_CORE) -> str:
    """CL/E1/E2/E3/ISO by core magnetization 2..-2; OTHER otherwise."""
    m = core_magnetization(state, core)
    table = {2.0: "CL", 1.0: "E1", 0.0: "E2", -1.0: "E3", -2.0: "ISO"}
    return table.get(m, "OTHER")


def _group_members(n: int, core, path_only: bool) -> dict[str, np.ndarray]:
    """Basis indices per label; path_only restricts E1/E2/E3 to outer-all-down."""
    outer_mask = 0
    for b in range(n):
        if b not in core:
            outer_mask |= 1 << b
    members: dict[str, list[int]] = {lab: [] for lab in (*GROUP_LABELS, "OTHER")}
    for i in range(1 << n):
        lab = group_label(i, core)
        if path_only and lab in ("E1", "E2", "E3") and (i & outer_mask) != 0:
            continue
        members[lab].append(i)
    return {lab: np.asarray(idx, dtype=np.intp) for lab, idx in members.items()}


@dataclass(frozen=True)
class GroupSeries:
    """Aggregate probability per label over trajectory snapshots."""

    times: np.ndarray
    values: dict[str, np.ndarray]


def group_probabilities(traj: Trajectory, core=SIGNATURE_CORE,
                        path_only: bool = False) -> GroupSeries:
    """Per-snapshot probability aggregated by core magnetization group.

    ``path_only`` restricts the intermediate groups (E1, E2, E3) to states
    with all outer spins down, i.e. the single-flip chain between the
    clustered and isolated ground states.
    """
    members = _group_members(traj.model.n, tuple(core), path_only)
    probs = traj.probabilities()
    values = {
        lab: probs[:, idx].sum(axis=1) if idx.size else np.zeros(probs.shape[0])
        for lab, idx in members.items()
    }
    return GroupSeries(times=traj.times.copy(), values=values)


def probability_change(traj: Trajectory, t1: float, t2: float,
                       eigsys: EigenSystem | None = None) -> np.ndarray:
    """p(t2) - p(t1) per state, in the z-basis or a fixed eigenbasis.

    For pause-window analysis pass the eigensystem at the hold point; both
    times must be recorded snapshots.
    """
    if t1 > t2:
        raise ValidationError(f"need t1 <= t2, got {t1} > {t2}")
    k1, k2 = traj.index_at(t1), traj.index_at(t2)
    if eigsys is None:
        p = traj.probabilities()
        return p[k2] - p[k1]
    a1 = eigen_overlaps(traj.state(k1), eigsys)
    a2 = eigen_overlaps(traj.state(k2), eigsys)
    return a2 - a1


def bridge_state_finder(eigsys: EigenSystem, partition: GroundStatePartition,
                        threshold: float, n_lowest: int | None = None):
    """Eigenstates overlapping both sides of the ground-state split.

    Returns (eigen_index, squared z-overlap profile) for every eigenstate
    whose profile exceeds ``threshold`` on some cluster-side state (label CL
    or E1) and on some isolated-side state (label E3 or ISO). Such states
    mediate probability transfer between the two ground-state regions.
    """
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must be in (0, 1), got {threshold}")
    dim = eigsys.eigenvalues.size
    n_spins = dim.bit_length() - 1
    core_mask = partition.core_mask()
    core = tuple(b for b in range(n_spins) if (core_mask >> b) & 1)
    labels = [group_label(i, core) for i in range(dim)]
    cluster_side = np.asarray([lab in ("CL", "E1") for lab in labels])
    isolated_side = np.asarray([lab in ("E3", "ISO") for lab in labels])
    count = dim if n_lowest is None else min(n_lowest, dim)
    found = []
    for a in range(count):
        v = eigsys.eigenvectors[:, a]
        prof = v.real ** 2 + v.imag ** 2
        if prof[cluster_side].max() > threshold and prof[isolated_side].max() > threshold:
            found.append((a, prof))
    return found


@dataclass(frozen=True)
class SweepRow:
    tau_anneal: float
    tau_pause: float
    s_pause: float
    ps: float
    pc: float
    ratio: float
    final_norm: float
    status: str


def _sweep_one(args) -> SweepRow:
    model, curves, params, partition, tau_anneal, tau_pause, s_pause = args
    if s_pause == 0.0:
        path = linear_path(tau_anneal)
        tau_pause = 0.0
    else:
        path = make_pause_path(tau_anneal, tau_pause, s_pause)
    try:
        traj = integrate(model, curves, path, params, record_every=None)
        ps, pc, ratio = ps_pc(traj.final_state(), partition)
        return SweepRow(tau_anneal, tau_pause, s_pause, ps, pc, ratio,
                        float(traj.norms[-1]), "ok")
    except Exception as exc:  # noqa: BLE001 - failed rows are recorded, sweep continues
        return SweepRow(tau_anneal, tau_pause, s_pause,
                        math.nan, math.nan, math.nan, math.nan,
                        f"error: {exc}")


def ratio_sweep(model: IsingModel, curves: ScheduleCurves, params: DynamicsParams,
                tau_anneal: float, tau_pause: float, s_pause_list,
                partition: GroundStatePartition | None = None,
                workers: int = 1) -> list[SweepRow]:
    """Final-time P_s/P_c for each hold fraction, plus the no-pause baseline.

    The baseline run (plain ramp over tau_anneal) is labeled s_pause = 0.0
    and is always included for a non-empty grid. Rows are ordered by s_pause;
    per-row failures are recorded in the status column and do not stop the
    sweep. ``workers`` > 1 distributes rows over processes; results do not
    depend on the worker count.
    """
    grid = sorted(set(float(s) for s in s_pause_list))
    if not grid:
        return []
    for s in grid:
        if not 0.0 <= s < 1.0:
            raise ValidationError(f"s_pause must be in [0, 1), got {s}")
    if grid[0] != 0.0:
        grid.insert(0, 0.0)
    if partition is None:
        partition = ground_state_partition(model)
    jobs = [(model, curves, params, partition, float(tau_anneal),
             float(tau_pause), s) for s in grid]
    if workers <= 1:
        return [_sweep_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, jobs))


def moving_average(times, values, window: float) -> np.ndarray:
    """Centered moving average over [t - w/2, t + w/2); edges shrink.

    A window smaller than the sample spacing returns the input unchanged.
    """
    if not window > 0:
        raise ValidationError(f"window must be > 0, got {window}")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size == 0:
        raise ValidationError("empty series")
    if t.shape != v.shape:
        raise ValidationError("times and values must have matching shapes")
    cs = np.concatenate(([0.0], np.cumsum(v)))
    lo = np.searchsorted(t, t - window / 2.0, side="left")
    hi = np.searchsorted(t, t + window / 2.0, side="left")
    return (cs[hi] - cs[lo]) / (hi - lo)


def mad_outlier_filter(values, k: float = 6.0) -> tuple[np.ndarray, int]:
    """Drop values with |v - median| > k * MAD; returns (kept, n_rejected).

    When the MAD is zero on non-constant data the scale is degenerate and
    the rule keeps exact median matches only (with a warning).
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValidationError("empty sequence")
    med = float(np.median(v))
    mad = float(np.median(np.abs(v - med)))
    if mad == 0.0:
        keep = v == med
        if not keep.all():
            warnings.warn(
                "MAD is zero on non-constant data; keeping exact median matches only",
                stacklevel=2,
            )
    else:
        keep = np.abs(v - med) <= k * mad
    return v[keep], int(v.size - keep.sum())
