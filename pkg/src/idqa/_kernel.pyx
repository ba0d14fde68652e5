# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend: blended-dynamics RHS and RK45 segment integrator.

Same interface and semantics as idqa._kernel_py (the numpy fallback); see
that module for the status-code contract. State and stage buffers are kept
as separate real/imaginary double arrays so the stage updates vectorize.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, fmax, fmin, isfinite, pow, sqrt

cnp.import_array()

# Dormand-Prince 5(4) coefficients.
cdef double C2 = 1.0 / 5.0
cdef double C3 = 3.0 / 10.0
cdef double C4 = 4.0 / 5.0
cdef double C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef int STATUS_OK = 0
cdef int STATUS_UNDERFLOW = 1
cdef int STATUS_MAXSTEPS = 2
cdef int STATUS_DRIFT = 3
cdef int STATUS_NONFINITE = 4


cdef inline double _interp(double[::1] xs, double[::1] ys, double x):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if x <= xs[0]:
        return ys[0]
    if x >= xs[n - 1]:
        return ys[n - 1]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if xs[mid] <= x:
            lo = mid
        else:
            hi = mid
    return ys[lo] + (x - xs[lo]) / (xs[hi] - xs[lo]) * (ys[hi] - ys[lo])


cdef class Plan:
    """Precomputed tables, settings and scratch buffers for one integration."""

    cdef Py_ssize_t N, n, m
    cdef double[::1] energies, gamma, de_unique
    cdef int[:, ::1] de_idx
    cdef double[::1] path_t, path_s, curve_s, curve_a, curve_b
    cdef double alpha, temperature, reg_floor, atol, rtol, drift_tol
    cdef bint bare_energies
    cdef int max_steps
    cdef int[::1] bits
    cdef double[::1] pbuf, rate_u, agam
    cdef double[:, ::1] Kre, Kim
    cdef double[::1] yre, yim, tre, tim, fre, fim

    def __init__(self, energies, gamma, de_unique, de_idx, path_t, path_s,
                 curve_s, curve_a, curve_b, alpha, temperature, reg_floor,
                 atol, rtol, bare_energies, max_steps, drift_tol):
        # np.array copies, so cached read-only inputs stay untouched
        self.energies = np.array(energies, dtype=np.float64, order="C")
        self.gamma = np.array(gamma, dtype=np.float64, order="C")
        self.de_unique = np.array(de_unique, dtype=np.float64, order="C")
        self.de_idx = np.array(de_idx, dtype=np.int32, order="C")
        self.path_t = np.array(path_t, dtype=np.float64, order="C")
        self.path_s = np.array(path_s, dtype=np.float64, order="C")
        self.curve_s = np.array(curve_s, dtype=np.float64, order="C")
        self.curve_a = np.array(curve_a, dtype=np.float64, order="C")
        self.curve_b = np.array(curve_b, dtype=np.float64, order="C")
        self.alpha = alpha
        self.temperature = temperature
        self.reg_floor = reg_floor
        self.atol = atol
        self.rtol = rtol
        self.bare_energies = bare_energies
        self.max_steps = max_steps
        self.drift_tol = drift_tol
        self.N = self.energies.shape[0]
        self.n = self.gamma.shape[0]
        self.m = self.de_unique.shape[0]
        self.bits = np.array([1 << b for b in range(self.n)], dtype=np.int32)
        self.pbuf = np.empty(self.N, dtype=np.float64)
        self.rate_u = np.empty(self.m, dtype=np.float64)
        self.agam = np.empty(self.n, dtype=np.float64)
        self.Kre = np.empty((7, self.N), dtype=np.float64)
        self.Kim = np.empty((7, self.N), dtype=np.float64)
        self.yre = np.empty(self.N, dtype=np.float64)
        self.yim = np.empty(self.N, dtype=np.float64)
        self.tre = np.empty(self.N, dtype=np.float64)
        self.tim = np.empty(self.N, dtype=np.float64)
        self.fre = np.empty(self.N, dtype=np.float64)
        self.fim = np.empty(self.N, dtype=np.float64)


def build_plan(**kwargs):
    return Plan(**kwargs)


cdef void _rhs_c(Plan P, double t, double* yre, double* yim,
                 double* ore, double* oim):
    cdef double s = _interp(P.path_t, P.path_s, t)
    cdef double a_val = _interp(P.curve_s, P.curve_a, s)
    cdef double b_val = _interp(P.curve_s, P.curve_b, s)
    cdef Py_ssize_t i, b, j, k, N = P.N, n = P.n
    cdef double coef, x, e, be, hre, him, pi, lp, out_rates, flow, denom, r, g
    cdef bint open_system = P.alpha != 0.0
    cdef int* didx

    for b in range(n):
        P.agam[b] = a_val * P.gamma[b]

    if open_system:
        for i in range(N):
            P.pbuf[i] = yre[i] * yre[i] + yim[i] * yim[i]
        coef = (1.0 if P.bare_energies else b_val) / P.temperature
        for k in range(P.m):
            x = coef * P.de_unique[k]
            if x > 0.0:
                e = exp(-x)
                P.rate_u[k] = e / (1.0 + e)
            else:
                P.rate_u[k] = 1.0 / (1.0 + exp(x))

    if not open_system:
        for i in range(N):
            be = b_val * P.energies[i]
            hre = be * yre[i]
            him = be * yim[i]
            for b in range(n):
                j = i ^ P.bits[b]
                hre -= P.agam[b] * yre[j]
                him -= P.agam[b] * yim[j]
            # -i * hc
            ore[i] = him
            oim[i] = -hre
        return

    didx = &P.de_idx[0, 0]
    for i in range(N):
        be = b_val * P.energies[i]
        hre = be * yre[i]
        him = be * yim[i]
        lp = 0.0
        out_rates = 0.0
        for b in range(n):
            j = i ^ P.bits[b]
            hre -= P.agam[b] * yre[j]
            him -= P.agam[b] * yim[j]
            r = P.rate_u[didx[i * n + b]]
            lp += r * P.pbuf[j]
            out_rates += 1.0 - r
        ore[i] = him
        oim[i] = -hre
        pi = P.pbuf[i]
        lp -= pi * out_rates
        # flow = (L p)_i - 2 Im(conj(y_i) hc)
        flow = lp - 2.0 * (yre[i] * him - yim[i] * hre)
        denom = pi if pi > P.reg_floor else P.reg_floor
        g = 0.5 * P.alpha * flow / denom
        ore[i] += g * yre[i]
        oim[i] += g * yim[i]


def rhs(Plan plan, double t, y):
    """Full blended RHS at time t (allocates the output)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yre = \
        np.ascontiguousarray(np.asarray(y, dtype=np.complex128).real)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yim = \
        np.ascontiguousarray(np.asarray(y, dtype=np.complex128).imag)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ore = np.empty(plan.N, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] oim = np.empty(plan.N, dtype=np.float64)
    _rhs_c(plan, t, &yre[0], &yim[0], &ore[0], &oim[0])
    return ore + 1j * oim


cdef int _integrate_to(Plan P, double t_begin, double t_end,
                       double* h_io, long* nfev, long* nsteps):
    """RK45 on the split state P.yre/P.yim from t_begin to t_end."""
    cdef double t = t_begin
    cdef double h = h_io[0]
    cdef double h_use, err_norm, scale, ay, ay5, ere, eim, er, fac
    cdef Py_ssize_t i, N = P.N
    cdef int attempts = 0
    cdef bint clamped
    cdef double* yre = &P.yre[0]
    cdef double* yim = &P.yim[0]
    cdef double* tre = &P.tre[0]
    cdef double* tim = &P.tim[0]
    cdef double* fre = &P.fre[0]
    cdef double* fim = &P.fim[0]
    cdef double* kre0 = &P.Kre[0, 0]
    cdef double* kim0 = &P.Kim[0, 0]
    cdef double* kre1 = &P.Kre[1, 0]
    cdef double* kim1 = &P.Kim[1, 0]
    cdef double* kre2 = &P.Kre[2, 0]
    cdef double* kim2 = &P.Kim[2, 0]
    cdef double* kre3 = &P.Kre[3, 0]
    cdef double* kim3 = &P.Kim[3, 0]
    cdef double* kre4 = &P.Kre[4, 0]
    cdef double* kim4 = &P.Kim[4, 0]
    cdef double* kre5 = &P.Kre[5, 0]
    cdef double* kim5 = &P.Kim[5, 0]
    cdef double* kre6 = &P.Kre[6, 0]
    cdef double* kim6 = &P.Kim[6, 0]

    if h <= 0.0:
        h = fmin(t_end - t, 1e-4)

    _rhs_c(P, t, yre, yim, kre0, kim0)
    nfev[0] += 1

    while t < t_end - 1e-14 * fmax(1.0, fabs(t_end)):
        if attempts >= P.max_steps:
            h_io[0] = h
            return STATUS_MAXSTEPS
        clamped = h > t_end - t
        h_use = fmin(h, t_end - t)
        if h_use < 1e-15 * fmax(1.0, fabs(t)):
            h_io[0] = h
            return STATUS_UNDERFLOW

        for i in range(N):
            tre[i] = yre[i] + h_use * (A21 * kre0[i])
            tim[i] = yim[i] + h_use * (A21 * kim0[i])
        _rhs_c(P, t + C2 * h_use, tre, tim, kre1, kim1)
        for i in range(N):
            tre[i] = yre[i] + h_use * (A31 * kre0[i] + A32 * kre1[i])
            tim[i] = yim[i] + h_use * (A31 * kim0[i] + A32 * kim1[i])
        _rhs_c(P, t + C3 * h_use, tre, tim, kre2, kim2)
        for i in range(N):
            tre[i] = yre[i] + h_use * (A41 * kre0[i] + A42 * kre1[i] + A43 * kre2[i])
            tim[i] = yim[i] + h_use * (A41 * kim0[i] + A42 * kim1[i] + A43 * kim2[i])
        _rhs_c(P, t + C4 * h_use, tre, tim, kre3, kim3)
        for i in range(N):
            tre[i] = yre[i] + h_use * (A51 * kre0[i] + A52 * kre1[i]
                                       + A53 * kre2[i] + A54 * kre3[i])
            tim[i] = yim[i] + h_use * (A51 * kim0[i] + A52 * kim1[i]
                                       + A53 * kim2[i] + A54 * kim3[i])
        _rhs_c(P, t + C5 * h_use, tre, tim, kre4, kim4)
        for i in range(N):
            tre[i] = yre[i] + h_use * (A61 * kre0[i] + A62 * kre1[i] + A63 * kre2[i]
                                       + A64 * kre3[i] + A65 * kre4[i])
            tim[i] = yim[i] + h_use * (A61 * kim0[i] + A62 * kim1[i] + A63 * kim2[i]
                                       + A64 * kim3[i] + A65 * kim4[i])
        _rhs_c(P, t + h_use, tre, tim, kre5, kim5)
        # 5th-order solution into fre/fim
        for i in range(N):
            fre[i] = yre[i] + h_use * (B1 * kre0[i] + B3 * kre2[i] + B4 * kre3[i]
                                       + B5 * kre4[i] + B6 * kre5[i])
            fim[i] = yim[i] + h_use * (B1 * kim0[i] + B3 * kim2[i] + B4 * kim3[i]
                                       + B5 * kim4[i] + B6 * kim5[i])
        _rhs_c(P, t + h_use, fre, fim, kre6, kim6)
        nfev[0] += 6
        attempts += 1

        err_norm = 0.0
        for i in range(N):
            ere = h_use * (E1 * kre0[i] + E3 * kre2[i] + E4 * kre3[i]
                           + E5 * kre4[i] + E6 * kre5[i] + E7 * kre6[i])
            eim = h_use * (E1 * kim0[i] + E3 * kim2[i] + E4 * kim3[i]
                           + E5 * kim4[i] + E6 * kim5[i] + E7 * kim6[i])
            ay = sqrt(yre[i] * yre[i] + yim[i] * yim[i])
            ay5 = sqrt(fre[i] * fre[i] + fim[i] * fim[i])
            scale = P.atol + P.rtol * fmax(ay, ay5)
            er = (ere * ere + eim * eim) / (scale * scale)
            err_norm += er
        err_norm = sqrt(err_norm / N)
        if not isfinite(err_norm):
            h_io[0] = h
            return STATUS_NONFINITE

        if err_norm <= 1.0:
            t += h_use
            for i in range(N):
                yre[i] = fre[i]
                yim[i] = fim[i]
                kre0[i] = kre6[i]
                kim0[i] = kim6[i]
            nsteps[0] += 1
            fac = 10.0 if err_norm == 0.0 else fmin(10.0, 0.9 * pow(err_norm, -0.2))
            if not clamped:
                h = h_use * fac
        else:
            h = h_use * fmax(0.2, 0.9 * pow(err_norm, -0.2))

    h_io[0] = h
    return STATUS_OK


def advance_chunk(Plan plan, y, double t_start, double seg_len, Py_ssize_t n_seg,
                  double h):
    """Advance n_seg intervals of seg_len, renormalizing after each.

    Returns (h, max_drift, last_prenorm, nfev, nsteps, status); y is updated
    in place.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y_arr = y
    cdef double t = t_start, t_end, nrm, drift, inv
    cdef double max_drift = 0.0, last_norm = 1.0
    cdef long nfev = 0, nsteps = 0
    cdef int status = STATUS_OK
    cdef Py_ssize_t i, kseg, N = plan.N

    for i in range(N):
        plan.yre[i] = y_arr[i].real
        plan.yim[i] = y_arr[i].imag

    for kseg in range(n_seg):
        t_end = t_start + seg_len * (kseg + 1)
        status = _integrate_to(plan, t, t_end, &h, &nfev, &nsteps)
        if status != STATUS_OK:
            break
        nrm = 0.0
        for i in range(N):
            nrm += plan.yre[i] * plan.yre[i] + plan.yim[i] * plan.yim[i]
        nrm = sqrt(nrm)
        if not isfinite(nrm) or nrm == 0.0:
            status = STATUS_NONFINITE
            break
        drift = fabs(nrm - 1.0)
        if drift > max_drift:
            max_drift = drift
        last_norm = nrm
        if drift > plan.drift_tol:
            status = STATUS_DRIFT
            break
        inv = 1.0 / nrm
        for i in range(N):
            plan.yre[i] *= inv
            plan.yim[i] *= inv
        t = t_end

    for i in range(N):
        y_arr[i] = plan.yre[i] + 1j * plan.yim[i]
    return h, max_drift, last_norm, nfev, nsteps, status
