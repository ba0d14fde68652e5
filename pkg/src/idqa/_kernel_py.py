"""Pure-numpy kernel backend.

Mirrors the compiled extension's interface: a Plan bundling the model,
schedule and integrator settings, an RHS evaluator, and ``advance_chunk``,
which integrates consecutive equal-length output intervals with an embedded
Dormand-Prince 5(4) pair and renormalizes the state at each interval end.

Status codes returned by advance_chunk: 0 ok, 1 step-size underflow,
2 max internal steps exceeded, 3 norm drift beyond tolerance, 4 state
became non-finite.
"""

from __future__ import annotations

import numpy as np

# Dormand-Prince 5(4) tableau; row 6 equals the 5th-order weights (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])

_STATUS_OK = 0
_STATUS_UNDERFLOW = 1
_STATUS_MAXSTEPS = 2
_STATUS_DRIFT = 3
_STATUS_NONFINITE = 4


class Plan:
    """Precomputed tables and settings for one integration."""

    def __init__(self, energies, gamma, de_unique, de_idx, path_t, path_s,
                 curve_s, curve_a, curve_b, alpha, temperature, reg_floor,
                 atol, rtol, bare_energies, max_steps, drift_tol):
        self.energies = np.ascontiguousarray(energies, dtype=float)
        self.gamma = np.ascontiguousarray(gamma, dtype=float)
        self.de_unique = np.ascontiguousarray(de_unique, dtype=float)
        self.de_idx = np.ascontiguousarray(de_idx, dtype=np.int32)
        self.path_t = np.ascontiguousarray(path_t, dtype=float)
        self.path_s = np.ascontiguousarray(path_s, dtype=float)
        self.curve_s = np.ascontiguousarray(curve_s, dtype=float)
        self.curve_a = np.ascontiguousarray(curve_a, dtype=float)
        self.curve_b = np.ascontiguousarray(curve_b, dtype=float)
        self.alpha = float(alpha)
        self.temperature = float(temperature)
        self.reg_floor = float(reg_floor)
        self.atol = float(atol)
        self.rtol = float(rtol)
        self.bare_energies = bool(bare_energies)
        self.max_steps = int(max_steps)
        self.drift_tol = float(drift_tol)
        self.N = self.energies.size
        self.n = self.gamma.size
        idx = np.arange(self.N)
        self.neighbors = [idx ^ (1 << b) for b in range(self.n)]


def build_plan(**kwargs) -> Plan:
    return Plan(**kwargs)


def _schedule_at(plan: Plan, t: float):
    s = np.interp(t, plan.path_t, plan.path_s)
    a = np.interp(s, plan.curve_s, plan.curve_a)
    b = np.interp(s, plan.curve_s, plan.curve_b)
    return a, b


def _rate(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x > 0
    ex = np.exp(-x[pos])
    out[pos] = ex / (1.0 + ex)
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out


def _rhs(plan: Plan, t: float, y: np.ndarray) -> np.ndarray:
    a_val, b_val = _schedule_at(plan, t)
    hc = (b_val * plan.energies) * y
    for b in range(plan.n):
        hc -= (a_val * plan.gamma[b]) * y[plan.neighbors[b]]
    out = -1j * hc
    if plan.alpha != 0.0:
        p = y.real * y.real + y.imag * y.imag
        coef = (1.0 if plan.bare_energies else b_val) / plan.temperature
        rate_u = _rate(coef * plan.de_unique)
        r = rate_u[plan.de_idx]
        lp = np.zeros(plan.N)
        out_rates = np.zeros(plan.N)
        for b in range(plan.n):
            lp += r[:, b] * p[plan.neighbors[b]]
            out_rates += 1.0 - r[:, b]
        lp -= p * out_rates
        denom = np.maximum(p, plan.reg_floor)
        flow = lp - 2.0 * (np.conj(y) * hc).imag
        out += (0.5 * plan.alpha) * (y / denom) * flow
    return out


def rhs(plan: Plan, t: float, y: np.ndarray) -> np.ndarray:
    """Full blended RHS at time t (allocates the output)."""
    return _rhs(plan, float(t), np.asarray(y, dtype=np.complex128))


def _integrate_to(plan: Plan, y: np.ndarray, t: float, t_end: float, h: float):
    """Adaptive RK45 from t to t_end in place; returns (h_pref, nfev, nsteps, status)."""
    if h <= 0.0:
        h = min(t_end - t, 1e-4)
    k = [None] * 7
    k[0] = _rhs(plan, t, y)
    nfev = 1
    nsteps = 0
    attempts = 0
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        if attempts >= plan.max_steps:
            return h, nfev, nsteps, _STATUS_MAXSTEPS
        clamped = h > t_end - t
        h_use = min(h, t_end - t)
        if h_use < 1e-15 * max(1.0, abs(t)):
            return h, nfev, nsteps, _STATUS_UNDERFLOW
        for s in range(1, 6):
            ytmp = y + h_use * sum(aa * k[l] for l, aa in enumerate(_A[s]) if aa != 0.0)
            k[s] = _rhs(plan, t + _C[s] * h_use, ytmp)
        y5 = y + h_use * sum(aa * k[l] for l, aa in enumerate(_A[6]) if aa != 0.0)
        k[6] = _rhs(plan, t + h_use, y5)
        nfev += 6
        attempts += 1
        err = h_use * sum(ee * k[l] for l, ee in enumerate(_E) if ee != 0.0)
        scale = plan.atol + plan.rtol * np.maximum(np.abs(y), np.abs(y5))
        err_norm = float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))
        if not np.isfinite(err_norm):
            return h, nfev, nsteps, _STATUS_NONFINITE
        if err_norm <= 1.0:
            t += h_use
            y[:] = y5
            k[0] = k[6]
            nsteps += 1
            factor = 10.0 if err_norm == 0.0 else min(10.0, 0.9 * err_norm ** -0.2)
            if not clamped:
                h = h_use * factor
        else:
            h = h_use * max(0.2, 0.9 * err_norm ** -0.2)
    return h, nfev, nsteps, _STATUS_OK


def advance_chunk(plan: Plan, y: np.ndarray, t_start: float, seg_len: float,
                  n_seg: int, h: float):
    """Advance n_seg intervals of seg_len, renormalizing after each.

    Returns (h, max_drift, last_prenorm, nfev, nsteps, status); y is updated
    in place.
    """
    t = float(t_start)
    nfev_total = 0
    nsteps_total = 0
    max_drift = 0.0
    last_norm = 1.0
    for kseg in range(int(n_seg)):
        t_end = t_start + seg_len * (kseg + 1)
        h, nfev, nsteps, status = _integrate_to(plan, y, t, t_end, h)
        nfev_total += nfev
        nsteps_total += nsteps
        if status != _STATUS_OK:
            return h, max_drift, last_norm, nfev_total, nsteps_total, status
        nrm = float(np.linalg.norm(y))
        if not np.isfinite(nrm) or nrm == 0.0:
            return h, max_drift, last_norm, nfev_total, nsteps_total, _STATUS_NONFINITE
        drift = abs(nrm - 1.0)
        max_drift = max(max_drift, drift)
        last_norm = nrm
        if drift > plan.drift_tol:
            return h, max_drift, last_norm, nfev_total, nsteps_total, _STATUS_DRIFT
        y /= nrm
        t = t_end
    return h, max_drift, last_norm, nfev_total, nsteps_total, _STATUS_OK
