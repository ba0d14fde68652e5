"""Shared fixtures and independent oracle helpers.

The oracles here deliberately avoid the package's own fast paths: dense
Hamiltonians come from explicit Pauli tensor products, the rate matrix is
assembled entry by entry, characteristic polynomials use the
Faddeev-LeVerrier recursion, and reference integrations go through scipy.
"""

from __future__ import annotations

import numpy as np
import pytest

from idqa import dynamics, schedule
from idqa.ising import IsingModel, build_quantum_signature

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
# bit convention: index 0 = down (sigma_z = -1), index 1 = up (+1)
SZ = np.array([[-1.0, 0.0], [0.0, 1.0]])
ID2 = np.eye(2)


def pauli_on(op: np.ndarray, spin: int, n: int) -> np.ndarray:
    """Operator acting on one spin; spin 0 is the least-significant bit."""
    out = np.eye(1)
    for b in range(n):
        out = np.kron(op if b == spin else ID2, out)
    return out


def dense_pauli_hamiltonian(model: IsingModel, A: float, B: float) -> np.ndarray:
    """B*H_c + A*H_q built from explicit tensor products."""
    n = model.n
    h = np.zeros((model.dim, model.dim))
    for i, j, J in model.couplings:
        h -= B * J * pauli_on(SZ, i, n) @ pauli_on(SZ, j, n)
    for i, hz in enumerate(model.fields):
        h -= B * hz * pauli_on(SZ, i, n)
    for i, g in enumerate(model.transverse):
        h -= A * g * pauli_on(SX, i, n)
    return h


def dense_rate_matrix(model: IsingModel, B: float, T: float) -> np.ndarray:
    """Entry-by-entry single-flip rate matrix over scaled energies."""
    from idqa.ising import classical_energy

    N = model.dim
    e = np.array([classical_energy(model, i) for i in range(N)])
    L = np.zeros((N, N))
    for j in range(N):
        for b in range(model.n):
            i = j ^ (1 << b)
            L[i, j] = 1.0 / (1.0 + np.exp((B * e[i] - B * e[j]) / T))
    np.fill_diagonal(L, -L.sum(axis=0))
    return L


def charpoly_eigenvalues(M: np.ndarray) -> np.ndarray:
    """Eigenvalues via Faddeev-LeVerrier coefficients and polynomial roots."""
    n = M.shape[0]
    coeffs = [1.0]
    Mk = np.zeros_like(M)
    ck = 1.0
    for k in range(1, n + 1):
        Mk = M @ (Mk + ck * np.eye(n))
        ck = -np.trace(Mk) / k
        coeffs.append(ck)
    return np.sort(np.roots(coeffs).real)


def schrodinger_reference(model: IsingModel, curves, path, t_span, c0,
                          rtol=1e-12, atol=1e-12) -> np.ndarray:
    """Closed-system reference integration through scipy (DOP853)."""
    from scipy.integrate import solve_ivp

    def rhs(t, y):
        s = schedule.eval_path(path, min(t, path.total_time))
        a_val, b_val = schedule.eval_curves(curves, s)
        from idqa.ising import apply_hamiltonian

        return -1j * apply_hamiltonian(model, a_val, b_val, y)

    sol = solve_ivp(rhs, t_span, np.asarray(c0, dtype=complex), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=False)
    assert sol.success
    return sol.y[:, -1]


def random_unit(rng, dim: int) -> np.ndarray:
    c = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return c / np.linalg.norm(c)


@pytest.fixture(scope="session")
def signature():
    return build_quantum_signature()


@pytest.fixture(scope="session")
def signature_pause_trajectories(signature):
    """Full-scale tau = 1+1 us runs at s_pause = 0.46, open and closed.

    Snapshots every 0.5 time units through the anneal (pause endpoints are
    path breakpoints and always recorded). Shared by the group-series and
    probability-transfer checks; heavy (about a minute), so computed once
    per session.
    """
    out = {}
    path = schedule.make_pause_path(1000.0, 1000.0, 0.46)
    for alpha in (0.0045, 0.0):
        params = dynamics.DynamicsParams(alpha=alpha)
        out[alpha] = dynamics.integrate(
            signature, schedule.LINEAR_CURVES, path, params, record_every=50)
    return out
