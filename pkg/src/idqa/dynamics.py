"""Blended quantum-thermal state-vector dynamics.

The state follows a nonlinear ODE that superposes Schrodinger evolution with
a classical single-flip master equation, weighted by the coupling alpha:

    dc_i/dt = -i (H c)_i
              + alpha / (2 max(|c_i|^2, eps)) * c_i
                * [ (L |c|^2)_i - 2 Im(conj(c_i) (H c)_i) ]

where H = B(t) H_c + A(t) H_q and L is the thermal transition-rate matrix
over the instantaneous diagonal energies. alpha=0 is exactly closed
Schrodinger dynamics; alpha=1 makes |c_i|^2 follow the master equation
exactly. The norm is conserved by the equation; the integrator still
renormalizes on a fixed output grid to stop numerical drift from
accumulating, and records snapshots there.

``discrete_step_reference`` implements the underlying one-step mixing
protocol (advance both descriptions by dt, then merge amplitudes and
probabilities); its dt->0 limit is the closed form above and serves as a
brute-force oracle for it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernel
from .errors import NormDriftError, MaxStepsExceeded, NumericalError, \
    SingularAmplitudeError, StepSizeUnderflow, ValidationError
from .ising import IsingModel, apply_hamiltonian, classical_energies
from .schedule import AnnealPath, ScheduleCurves

#: Paper-matched integrator defaults (see DynamicsParams).
DEFAULT_TOLERANCE = 1.136871e-13


class StateVector:
    """Unit-norm vector of 2^n complex z-basis amplitudes."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, *, normalize: bool = False):
        arr = np.array(amplitudes, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("amplitudes must be a non-empty 1-D array")
        nrm = float(np.linalg.norm(arr))
        if normalize:
            if nrm == 0.0:
                raise ValidationError("cannot normalize a zero vector")
            arr /= nrm
        elif abs(nrm - 1.0) > 1e-9:
            raise ValidationError(f"state norm {nrm!r} deviates from 1 beyond 1e-9")
        arr.setflags(write=False)
        self.amplitudes = arr

    @classmethod
    def uniform(cls, n: int) -> "StateVector":
        dim = 1 << n
        return cls(np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return (a.real * a.real + a.imag * a.imag)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DynamicsParams:
    """Coupling, temperature and integrator settings.

    Defaults: T=0.3, alpha=0.0045, atol=rtol=1.136871e-13, renormalization and
    output grid 0.01 time units, 200000 internal steps per grid interval,
    physical-to-dimensionless time factor 1000 per microsecond.
    ``bare_energies`` switches the rate matrix from the instantaneous diagonal
    scale B(s)*E_i to the unscaled E_i (sensitivity studies).
    """

    alpha: float = 0.0045
    temperature: float = 0.3
    time_scale: float = 1000.0
    reg_floor: float = 1e-24
    atol: float = DEFAULT_TOLERANCE
    rtol: float = DEFAULT_TOLERANCE
    output_step: float = 0.01
    max_steps: int = 200000
    drift_tol: float = 1e-6
    bare_energies: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.temperature > 0.0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if self.reg_floor < 0.0:
            raise ValidationError(f"reg_floor must be >= 0, got {self.reg_floor}")
        if not (self.atol > 0.0 and self.rtol > 0.0):
            raise ValidationError("atol and rtol must be > 0")
        if not self.output_step > 0.0:
            raise ValidationError(f"output_step must be > 0, got {self.output_step}")
        if not self.time_scale > 0.0:
            raise ValidationError(f"time_scale must be > 0, got {self.time_scale}")
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be >= 1, got {self.max_steps}")

    def with_(self, **kw) -> "DynamicsParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of one integration: times, amplitudes, pre-renormalization norms."""

    times: np.ndarray
    amplitudes: np.ndarray  # (n_snapshots, 2^n) complex
    norms: np.ndarray       # norm at each snapshot before renormalization
    params: DynamicsParams
    path: AnnealPath
    curves: ScheduleCurves
    model: IsingModel
    nfev: int
    nsteps: int
    max_drift: float

    def state(self, k: int) -> StateVector:
        return StateVector(self.amplitudes[k], normalize=True)

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag

    def index_at(self, t: float) -> int:
        """Snapshot index at time t; raises if t was not recorded."""
        k = int(np.searchsorted(self.times, t))
        for cand in (k - 1, k, k + 1):
            if 0 <= cand < self.times.size and abs(self.times[cand] - t) <= 1e-9 * max(1.0, abs(t)):
                return cand
        raise ValidationError(f"time {t} not recorded in trajectory")

    def final_state(self) -> StateVector:
        return self.state(self.times.size - 1)


@lru_cache(maxsize=128)
def _flip_tables(model: IsingModel):
    """Energies plus single-flip energy differences dE[i,b] = E_i - E_{i^bit}.

    The differences are deduplicated so the kernels evaluate one rate per
    distinct value per call instead of one per (state, bit) pair.
    """
    e = classical_energies(model)
    N, n = model.dim, model.n
    idx = np.arange(N)
    de = np.empty((N, n))
    for b in range(n):
        de[:, b] = e - e[idx ^ (1 << b)]
    uniq, inverse = np.unique(de, return_inverse=True)
    de_idx = np.ascontiguousarray(inverse.reshape(N, n).astype(np.int32))
    uniq = np.ascontiguousarray(uniq)
    uniq.setflags(write=False)
    de_idx.setflags(write=False)
    return e, uniq, de_idx


def flip_rate(x):
    """Thermal acceptance 1 / (1 + e^x), overflow-safe; x = dE/T."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x > 0
    ex = np.exp(-x[pos])
    out[pos] = ex / (1.0 + ex)
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out


def transition_rate_apply(model: IsingModel, B: float, T: float, p: np.ndarray) -> np.ndarray:
    """Apply the single-flip rate matrix: (L p)_i.

    L_ij = [1 + exp((Et_i - Et_j)/T)]^, for Hamming-distance-1 (i, j), with
    Et = B*E, and diagonal L_jj = -sum_{k != j} L_kj so columns sum to zero.
    Applied matrix-free through bit-flip adjacency.
    """
    if not T > 0.0:
        raise ValidationError(f"temperature must be > 0, got {T}")
    p = np.asarray(p, dtype=float)
    if p.shape != (model.dim,):
        raise ValidationError(f"probability vector shape {p.shape} != ({model.dim},)")
    total = float(p.sum())
    if np.any(p < -1e-12) or abs(total - 1.0) > 1e-9:
        warnings.warn(
            f"probability vector not normalized (sum={total!r}); applying L anyway",
            stacklevel=2,
        )
    return _rates_apply(model, B / T, p)


def _rates_apply(model: IsingModel, coef: float, p: np.ndarray) -> np.ndarray:
    """(L p) with rates 1/(1+exp(coef * dE)); coef folds B (or 1) and 1/T."""
    _, uniq, de_idx = _flip_tables(model)
    rate_u = flip_rate(coef * uniq)
    r = rate_u[de_idx]  # (N, n): rate INTO i FROM its b-flip neighbor
    idx = np.arange(model.dim)
    out = np.zeros(model.dim)
    out_rate_sum = np.zeros(model.dim)
    for b in range(model.n):
        out += r[:, b] * p[idx ^ (1 << b)]
        out_rate_sum += 1.0 - r[:, b]  # rate(-x) = 1 - rate(x)
    out -= p * out_rate_sum
    return out


def id_rhs(model: IsingModel, A: float, B: float, params: DynamicsParams,
           c: np.ndarray) -> np.ndarray:
    """Time derivative of the amplitudes at fixed schedule values (A, B).

    At alpha=0 this is exactly -i H c (the nonlinear term is skipped, not
    multiplied by zero).
    """
    c = np.asarray(c, dtype=np.complex128)
    hc = apply_hamiltonian(model, A, B, c)
    dc = -1j * hc
    if params.alpha == 0.0:
        return dc
    p = c.real * c.real + c.imag * c.imag
    if params.reg_floor == 0.0 and np.any(p == 0.0):
        raise SingularAmplitudeError(
            "amplitude hit zero with reg_floor=0; nonlinear term divides by |c_i|^2"
        )
    coef = (1.0 if params.bare_energies else B) / params.temperature
    lp = _rates_apply(model, coef, p)
    denom = np.maximum(p, params.reg_floor)
    imag_flow = 2.0 * (c.conjugate() * hc).imag
    dc += (params.alpha / (2.0 * denom)) * c * (lp - imag_flow)
    return dc


def two_level_closed_form_rhs(h: float, gamma: float, alpha: float,
                              u: complex, d: complex) -> tuple[complex, complex]:
    """Single-spin derivative in the zero-temperature limit, written out by hand.

    ``u``/``d`` are the spin-up/down amplitudes for the Hamiltonian
    [[-h, -gamma], [-gamma, h]] (h > 0, so down->up flips are the downhill
    direction and carry rate 1). Used as an independent oracle against
    ``id_rhs``.
    """
    du = 1j * h * u + 1j * gamma * d + (alpha / 2.0) * (
        abs(d) ** 2 / np.conj(u) - 1j * gamma * (d - np.conj(d) * u / np.conj(u))
    )
    dd = 1j * gamma * u - 1j * h * d + (alpha / 2.0) * (
        -d - 1j * gamma * (u - np.conj(u) * d / np.conj(d))
    )
    return du, dd


def discrete_step_reference(model: IsingModel, A: float, B: float,
                            params: DynamicsParams, c: StateVector,
                            dt: float) -> StateVector:
    """One explicit step of the amplitude/probability mixing protocol.

    Euler-advance the Schrodinger amplitudes and the master-equation
    probabilities separately, blend the probabilities with weight alpha,
    and reattach the advanced phases. The dt->0 finite difference of this
    step converges (first order) to ``id_rhs``.
    """
    if not dt > 0.0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    amps = c.amplitudes
    hc = apply_hamiltonian(model, A, B, amps)
    a = amps - 1j * hc * dt
    p = amps.real ** 2 + amps.imag ** 2
    coef = (1.0 if params.bare_energies else B) / params.temperature
    q = p + _rates_apply(model, coef, p) * dt
    r = (1.0 - params.alpha) * (a.real ** 2 + a.imag ** 2) + params.alpha * q
    neg = r < 0.0
    if np.any(neg):
        warnings.warn(
            f"{int(neg.sum())} blended probabilities were negative (dt too large); "
            "clamped to 0",
            stacklevel=2,
        )
        r = np.where(neg, 0.0, r)
    mod_a = np.abs(a)
    # |a_i| = 0 leaves the phase undefined; keep the previous phase then.
    safe = mod_a > 0.0
    phase = np.ones_like(a)
    phase[safe] = a[safe] / mod_a[safe]
    prev_mod = np.abs(amps)
    prev_safe = ~safe & (prev_mod > 0.0)
    phase[prev_safe] = amps[prev_safe] / prev_mod[prev_safe]
    return StateVector(np.sqrt(r) * phase, normalize=True)


def _build_plan(model: IsingModel, curves: ScheduleCurves, path: AnnealPath,
                params: DynamicsParams):
    e, uniq, de_idx = _flip_tables(model)
    return kernel.build_plan(
        energies=e,
        gamma=np.asarray(model.transverse, dtype=float),
        de_unique=uniq,
        de_idx=de_idx,
        path_t=path.times(),
        path_s=path.fractions(),
        curve_s=curves.s_grid(),
        curve_a=curves.a_values(),
        curve_b=curves.b_values(),
        alpha=params.alpha,
        temperature=params.temperature,
        reg_floor=params.reg_floor,
        atol=params.atol,
        rtol=params.rtol,
        bare_energies=params.bare_energies,
        max_steps=params.max_steps,
        drift_tol=params.drift_tol,
    )


def _grid_instructions(path: AnnealPath, step: float, t0: float, t1: float,
                       record_every):
    """Renormalization ticks in (t0, t1] and chunk instructions between records.

    Returns (ticks, record_flags, chunks) where chunks is a list of
    (t_start, seg_len, n_seg, tick_index_after) and record ticks include
    every ``record_every``-th tick, all path breakpoints inside the span,
    and the final time. ``record_every=None`` records breakpoints and the
    final tick only.
    """
    tol = 1e-9 * max(1.0, abs(t1))
    n_seg = max(1, int(math.ceil((t1 - t0) / step - 1e-9)))
    ticks = list(t0 + step * np.arange(1, n_seg + 1))
    if ticks[-1] > t1 - tol:
        ticks[-1] = t1
    else:
        ticks.append(t1)
    breaks = [t for t, _ in path.breakpoints if t0 + tol < t < t1 - tol]
    merged = sorted(set(ticks) | set(breaks))
    ticks = []
    for t in merged:
        if ticks and t - ticks[-1] <= tol:
            ticks[-1] = max(ticks[-1], t)
        else:
            ticks.append(t)
    ticks[-1] = t1
    ticks = np.asarray(ticks)

    is_break = np.zeros(ticks.size, dtype=bool)
    for b in breaks:
        k = int(np.argmin(np.abs(ticks - b)))
        is_break[k] = True
    record = np.zeros(ticks.size, dtype=bool)
    if record_every is not None:
        if record_every < 1:
            raise ValidationError(f"record_every must be >= 1, got {record_every}")
        record[record_every - 1::record_every] = True
    record |= is_break
    record[-1] = True

    chunks = []
    prev_t = t0
    start = 0
    rec_idx = list(np.flatnonzero(record))
    for r in rec_idx:
        seg_times = ticks[start:r + 1]
        lens = np.diff(np.concatenate(([prev_t], seg_times)))
        # group consecutive equal segment lengths into one kernel call
        i = 0
        t_run = prev_t
        while i < lens.size:
            j = i
            while j + 1 < lens.size and abs(lens[j + 1] - lens[i]) <= 1e-12 * max(1.0, lens[i]):
                j += 1
            count = j - i + 1
            chunks.append((t_run, float(lens[i]), count, r if j == lens.size - 1 else None))
            t_run += float(lens[i]) * count
            i = j + 1
        prev_t = float(ticks[r])
        start = r + 1
    return ticks, record, chunks


_STATUS_ERRORS = {
    1: (StepSizeUnderflow, "integration step size underflowed"),
    2: (MaxStepsExceeded, "exceeded max internal steps within one output interval"),
    3: (NormDriftError, "norm drift exceeded tolerance before renormalization"),
    4: (NumericalError, "state became non-finite during integration"),
}


def integrate(model: IsingModel, curves: ScheduleCurves, path: AnnealPath,
              params: DynamicsParams, *, initial_state: StateVector | None = None,
              t0: float = 0.0, t1: float | None = None,
              record_every: int | None = 1) -> Trajectory:
    """Integrate the blended dynamics over [t0, t1] (default: the whole path).

    The initial state defaults to the uniform superposition. The state is
    renormalized on the output grid (params.output_step) and at every path
    breakpoint; snapshots are recorded every ``record_every`` grid points
    (breakpoints and endpoints always; ``None`` keeps endpoints/breakpoints
    only). Raises NumericalError subclasses on step-size underflow, max-step
    exhaustion, or norm drift beyond params.drift_tol.
    """
    total = path.total_time
    t_end = total if t1 is None else float(t1)
    if not (0.0 <= t0 < t_end <= total + 1e-9 * max(1.0, total)):
        raise ValidationError(f"bad time span [{t0}, {t_end}] for path of length {total}")
    t_end = min(t_end, total)
    if initial_state is None:
        initial_state = StateVector.uniform(model.n)
    if initial_state.dim != model.dim:
        raise ValidationError(
            f"initial state dimension {initial_state.dim} != {model.dim}")

    plan = _build_plan(model, curves, path, params)
    ticks, record, chunks = _grid_instructions(
        path, params.output_step, t0, t_end, record_every)

    y = initial_state.amplitudes.astype(np.complex128, copy=True)
    snap_times = [t0]
    snap_amps = [y.copy()]
    snap_norms = [float(np.linalg.norm(y))]

    h = 0.0  # kernel picks the first step
    nfev = nsteps = 0
    max_drift = 0.0
    for t_start, seg_len, count, rec_tick in chunks:
        h, drift, last_norm, fev, stp, status = kernel.advance_chunk(
            plan, y, t_start, seg_len, count, h)
        nfev += fev
        nsteps += stp
        max_drift = max(max_drift, drift)
        if status != 0:
            exc, msg = _STATUS_ERRORS[status]
            raise exc(f"{msg} (t ~ {t_start + seg_len * count:.6g})")
        if rec_tick is not None:
            snap_times.append(float(ticks[rec_tick]))
            snap_amps.append(y.copy())
            snap_norms.append(last_norm)

    return Trajectory(
        times=np.asarray(snap_times),
        amplitudes=np.asarray(snap_amps),
        norms=np.asarray(snap_norms),
        params=params,
        path=path,
        curves=curves,
        model=model,
        nfev=nfev,
        nsteps=nsteps,
        max_drift=max_drift,
    )
