"""Transverse-field Ising models in the z-basis.

Basis convention: a state is an integer in [0, 2^n); bit b encodes spin b,
with bit 1 meaning sigma^z = +1 (up) and bit 0 meaning sigma^z = -1 (down).
The all-down configuration is therefore index 0.

The Hamiltonian splits as H = B*H_c + A*H_q with a diagonal problem part
H_c = -sum_{(ij)} J_ij sz_i sz_j - sum_i h_i sz_i and a single-flip driver
H_q = -sum_i Gamma_i sx_i.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

# Exhaustive enumeration / dense construction guard: 2^20 states.
MAX_ENUMERATION_SPINS = 20

SIGNATURE_CORE = (0, 1, 2, 3)


@dataclass(frozen=True)
class IsingModel:
    """Immutable Ising instance: couplings J_ij, fields h_i, transverse Gamma_i."""

    n: int
    couplings: tuple[tuple[int, int, float], ...]
    fields: tuple[float, ...]
    transverse: tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"spin count must be >= 1, got {self.n}")
        object.__setattr__(
            self,
            "couplings",
            tuple((int(i), int(j), float(J)) for i, j, J in self.couplings),
        )
        object.__setattr__(self, "fields", tuple(float(h) for h in self.fields))
        object.__setattr__(self, "transverse", tuple(float(g) for g in self.transverse))
        if len(self.fields) != self.n:
            raise ValidationError(f"expected {self.n} fields, got {len(self.fields)}")
        if len(self.transverse) != self.n:
            raise ValidationError(
                f"expected {self.n} transverse coefficients, got {len(self.transverse)}"
            )
        seen = set()
        for i, j, _ in self.couplings:
            if not (0 <= i < j < self.n):
                raise ValidationError(f"coupling ({i},{j}) needs 0 <= i < j < n={self.n}")
            if (i, j) in seen:
                raise ValidationError(f"duplicate coupling ({i},{j})")
            seen.add((i, j))
        for b, g in enumerate(self.transverse):
            if not g > 0:
                raise ValidationError(f"transverse coefficient {b} must be > 0, got {g}")

    @property
    def dim(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class ClassicalSpectrum:
    """Diagonal energies of H_c over all 2^n configurations."""

    energies: np.ndarray
    ground_energy: float
    ground_states: tuple[int, ...]


def make_model(n, couplings, fields, transverse=None) -> IsingModel:
    """Convenience constructor; transverse defaults to 1 for every spin."""
    if transverse is None:
        transverse = (1.0,) * n
    return IsingModel(n=n, couplings=tuple(couplings), fields=tuple(fields),
                      transverse=tuple(transverse))


def build_quantum_signature() -> IsingModel:
    """Eight-spin frustrated instance with 16 clustered + 1 isolated ground states.

    Core spins 0-3 (h=+1) form a ferromagnetic ring; each carries one pendant
    outer spin 4-7 (h=-1). All couplings are J=1, all Gamma are 1. The ground
    manifold is the 16 core-up states plus the all-down state, at energy -8.
    """
    ring = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]
    pendants = [(0, 4, 1.0), (1, 5, 1.0), (2, 6, 1.0), (3, 7, 1.0)]
    return make_model(
        8,
        ring + pendants,
        fields=(1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0),
    )


def spin_values(state: int, n: int) -> np.ndarray:
    """Sigma^z values (+1/-1) per spin for a basis index."""
    bits = (state >> np.arange(n)) & 1
    return 2.0 * bits - 1.0


def classical_energy(model: IsingModel, state: int) -> float:
    """E = -sum J_ij s_i s_j - sum h_i s_i for one configuration."""
    if not (0 <= state < model.dim):
        raise ValidationError(f"state index {state} out of range for n={model.n}")
    s = spin_values(state, model.n)
    e = 0.0
    for i, j, J in model.couplings:
        e -= J * s[i] * s[j]
    for i, h in enumerate(model.fields):
        e -= h * s[i]
    return float(e)


@lru_cache(maxsize=128)
def _energies(model: IsingModel) -> np.ndarray:
    n, N = model.n, model.dim
    bits = (np.arange(N, dtype=np.int64)[:, None] >> np.arange(n)[None, :]) & 1
    s = (2.0 * bits - 1.0).astype(np.float64)
    e = np.zeros(N)
    for i, j, J in model.couplings:
        e -= J * s[:, i] * s[:, j]
    for i, h in enumerate(model.fields):
        e -= h * s[:, i]
    e.setflags(write=False)
    return e


def classical_energies(model: IsingModel, max_n: int = MAX_ENUMERATION_SPINS) -> np.ndarray:
    """All 2^n diagonal energies, index-aligned with the basis."""
    if model.n > max_n:
        raise ValidationError(
            f"n={model.n} exceeds the enumeration cap {max_n} (2^n energies)"
        )
    return _energies(model)


def classical_spectrum(model: IsingModel, max_n: int = MAX_ENUMERATION_SPINS,
                       tol: float = 1e-12) -> ClassicalSpectrum:
    """Full diagonal spectrum with the exact ground set.

    Ground membership uses an absolute tolerance (default 1e-12) that only
    absorbs float rounding; for integer-valued inputs the set is exact.
    """
    e = classical_energies(model, max_n=max_n)
    ground = float(e.min())
    states = tuple(int(i) for i in np.flatnonzero(e <= ground + tol))
    return ClassicalSpectrum(energies=e, ground_energy=ground, ground_states=states)


def apply_hamiltonian(model: IsingModel, A: float, B: float, c: np.ndarray) -> np.ndarray:
    """Matrix-free H c with H = B*H_c + A*H_q.

    Diagonal part B*E_i*c_i; off-diagonal part -A * sum_b Gamma_b * c_{i XOR (1<<b)}.
    """
    c = np.asarray(c)
    if c.shape != (model.dim,):
        raise ValidationError(f"state dimension {c.shape} != ({model.dim},)")
    e = classical_energies(model)
    out = (B * e) * c
    if A != 0.0:
        idx = np.arange(model.dim)
        for b, g in enumerate(model.transverse):
            out -= (A * g) * c[idx ^ (1 << b)]
    return out


def load_model_file(path) -> IsingModel:
    """Read a model description file (TOML).

    Schema: ``n`` (int), ``couplings`` (list of [i, j, J] triples),
    ``fields`` (list of n floats), optional ``transverse`` (list of n floats,
    default all 1).
    """
    with open(path, "rb") as fh:
        try:
            data = _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ValidationError(f"cannot parse model file {path}: {exc}") from exc
    try:
        n = int(data["n"])
        couplings = [(int(i), int(j), float(J)) for i, j, J in data.get("couplings", [])]
        fields = [float(h) for h in data["fields"]]
        transverse = data.get("transverse")
        if transverse is not None:
            transverse = [float(g) for g in transverse]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad model file {path}: {exc}") from exc
    return make_model(n, couplings, fields, transverse)
