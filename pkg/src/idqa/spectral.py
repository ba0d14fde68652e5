"""Instantaneous eigen-decomposition of H(s) and gap analysis.

Eigenstates are labeled by ascending eigenvalue at each s independently
(no continuity tracking); vectors inside a degenerate multiplet are
solver-dependent, so downstream quantities should aggregate over
multiplets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ising import IsingModel, classical_energies
from .schedule import ScheduleCurves, eval_curves

DENSE_SOLVER_CAP = 4096


@dataclass(frozen=True)
class EigenSystem:
    """Full orthonormal decomposition of H(s) at one schedule point."""

    s: float
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # column a is the eigenvector of eigenvalues[a]


def dense_hamiltonian(model: IsingModel, A: float, B: float) -> np.ndarray:
    """Dense H = B*H_c + A*H_q (real symmetric)."""
    N = model.dim
    if N > DENSE_SOLVER_CAP:
        raise ValidationError(
            f"dimension {N} exceeds the dense-solver cap {DENSE_SOLVER_CAP}")
    h = np.diag(B * classical_energies(model))
    idx = np.arange(N)
    for b, g in enumerate(model.transverse):
        h[idx, idx ^ (1 << b)] -= A * g
    return h


def eigensystem(model: IsingModel, curves: ScheduleCurves, s: float) -> EigenSystem:
    """Instantaneous eigen-decomposition at schedule point s."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"s={s} outside [0, 1]")
    a_val, b_val = eval_curves(curves, s)
    h = dense_hamiltonian(model, a_val, b_val)
    vals, vecs = np.linalg.eigh(h)
    return EigenSystem(s=float(s), eigenvalues=vals, eigenvectors=vecs)


def gaps(eigsys: EigenSystem, k: int) -> np.ndarray:
    """Excitation gaps (lambda_a - lambda_0) for a = 1..k, ascending."""
    dim = eigsys.eigenvalues.size
    if not 0 < k < dim:
        raise ValidationError(f"k={k} must be in [1, {dim - 1}]")
    return eigsys.eigenvalues[1:k + 1] - eigsys.eigenvalues[0]


def eigen_overlaps(state, eigsys: EigenSystem) -> np.ndarray:
    """Probabilities |<a|psi>|^2 over the instantaneous eigenstates."""
    amps = np.asarray(getattr(state, "amplitudes", state), dtype=np.complex128)
    if amps.shape != (eigsys.eigenvalues.size,):
        raise ValidationError(
            f"state dimension {amps.shape} does not match eigensystem "
            f"({eigsys.eigenvalues.size},)")
    proj = eigsys.eigenvectors.conj().T @ amps
    return proj.real ** 2 + proj.imag ** 2


def gap_grid(model: IsingModel, curves: ScheduleCurves, k: int,
             s_step: float = 0.002) -> tuple[np.ndarray, np.ndarray]:
    """Gaps of the k lowest excited states over a uniform s grid.

    Returns (s_values, gap_matrix) with gap_matrix[row, a-1] = gap of level a.
    """
    if not s_step > 0:
        raise ValidationError(f"s_step must be > 0, got {s_step}")
    n_pts = int(round(1.0 / s_step)) + 1
    s_vals = np.linspace(0.0, 1.0, n_pts)
    out = np.empty((n_pts, k))
    for row, s in enumerate(s_vals):
        out[row] = gaps(eigensystem(model, curves, s), k)
    return s_vals, out
