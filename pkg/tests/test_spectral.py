import numpy as np
import pytest

from idqa.errors import ValidationError
from idqa.schedule import LINEAR_CURVES, eval_curves
from idqa.spectral import (dense_hamiltonian, eigen_overlaps, eigensystem,
                           gap_grid, gaps)
from idqa.ising import make_model

from conftest import charpoly_eigenvalues, dense_pauli_hamiltonian, random_unit


class TestEigensystem:
    def test_final_point_recovers_classical_spectrum(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 1.0)
        # 17 ground states at -8: the 16 lowest excitation gaps vanish
        assert np.allclose(es.eigenvalues[:17], -8.0, atol=1e-9)
        from idqa.ising import classical_spectrum

        assert np.allclose(es.eigenvalues,
                           np.sort(classical_spectrum(signature).energies),
                           atol=1e-9)

    def test_initial_point_uniform_ground_state(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 0.0)
        assert es.eigenvalues[0] == pytest.approx(-8.0, abs=1e-9)
        ground = es.eigenvectors[:, 0]
        assert np.allclose(np.abs(ground), 1 / 16.0, atol=1e-9)

    def test_matches_characteristic_polynomial_roots(self):
        rng = np.random.default_rng(51)
        m = make_model(3, [(0, 1, 0.9), (1, 2, -0.4), (0, 2, 0.6)],
                       [0.3, -0.8, 0.5], [1.0, 0.7, 1.2])
        es = eigensystem(m, LINEAR_CURVES, 0.5)
        h = dense_pauli_hamiltonian(m, 0.5, 0.5)
        assert np.allclose(es.eigenvalues, charpoly_eigenvalues(h), atol=1e-9)

    def test_dense_build_matches_pauli_oracle(self, signature):
        h = dense_hamiltonian(signature, 0.37, 0.61)
        assert np.allclose(h, dense_pauli_hamiltonian(signature, 0.37, 0.61),
                           atol=1e-12)

    def test_orthonormal_and_low_residual(self):
        rng = np.random.default_rng(52)
        for _ in range(50):
            n = int(rng.integers(2, 4))
            couplings = [(i, j, float(rng.normal()))
                         for i in range(n) for j in range(i + 1, n)]
            m = make_model(n, couplings, rng.normal(size=n),
                           rng.uniform(0.5, 1.5, size=n))
            s = float(rng.uniform(0, 1))
            es = eigensystem(m, LINEAR_CURVES, s)
            v = es.eigenvectors
            assert np.max(np.abs(v.T @ v - np.eye(m.dim))) < 1e-10
            h = dense_hamiltonian(m, *eval_curves(LINEAR_CURVES, s))
            resid = np.max(np.abs(h @ v - v * es.eigenvalues[None, :]))
            assert resid <= 1e-9 * max(1.0, np.linalg.norm(h, 2))

    def test_eigenvalue_continuity(self, signature):
        # Weyl: sorted-eigenvalue jumps are bounded by ||dH|| = |dA|*||H_q|| + |dB|*||H_c||
        ds = 1e-3
        bound = (8.0 + 8.0) * ds * 1.01
        svals = np.arange(0.0, 1.0 + ds / 2, ds)
        prev = eigensystem(signature, LINEAR_CURVES, 0.0).eigenvalues
        worst = 0.0
        for s in svals[1:]:
            cur = eigensystem(signature, LINEAR_CURVES, float(min(s, 1.0))).eigenvalues
            worst = max(worst, float(np.max(np.abs(cur - prev))))
            prev = cur
        assert worst <= bound

    def test_out_of_range(self, signature):
        with pytest.raises(ValidationError):
            eigensystem(signature, LINEAR_CURVES, 1.2)


class TestGaps:
    def test_sixteen_zero_gaps_at_end(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 1.0)
        g = gaps(es, 20)
        assert np.all(g[:16] <= 1e-9)
        assert g[16] > 0.1

    def test_non_negative(self, signature):
        for s in (0.0, 0.3, 0.7):
            assert gaps(eigensystem(signature, LINEAR_CURVES, s), 1)[0] >= 0.0

    def test_first_gap_crosses_thermal_scale(self, signature):
        # with the shipped linear curves the first excited gap falls below
        # T = 0.3 somewhere in the upper half of the anneal
        svals = np.linspace(0.0, 1.0, 101)
        g1 = np.array([gaps(eigensystem(signature, LINEAR_CURVES, s), 1)[0]
                       for s in svals])
        below = svals[g1 < 0.3]
        assert below.size > 0
        assert 0.3 < below[0] <= 1.0

    def test_k_bounds(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 0.5)
        with pytest.raises(ValidationError):
            gaps(es, 0)
        with pytest.raises(ValidationError):
            gaps(es, 256)


class TestEigenOverlaps:
    def test_basis_eigenvector(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 0.4)
        p = eigen_overlaps(es.eigenvectors[:, 3].astype(complex), es)
        assert p[3] == pytest.approx(1.0, abs=1e-12)
        assert np.sum(p) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_state_is_initial_ground(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 0.0)
        p = eigen_overlaps(np.full(256, 1 / 16.0, dtype=complex), es)
        assert p[0] == pytest.approx(1.0, abs=1e-12)

    def test_completeness(self, signature):
        rng = np.random.default_rng(53)
        es = eigensystem(signature, LINEAR_CURVES, 0.6)
        for _ in range(5):
            p = eigen_overlaps(random_unit(rng, 256), es)
            assert np.sum(p) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_invariance(self, signature):
        rng = np.random.default_rng(54)
        es = eigensystem(signature, LINEAR_CURVES, 0.6)
        c = random_unit(rng, 256)
        p1 = eigen_overlaps(c, es)
        p2 = eigen_overlaps(np.exp(0.77j) * c, es)
        assert np.allclose(p1, p2, atol=1e-13)

    def test_dimension_mismatch(self, signature):
        es = eigensystem(signature, LINEAR_CURVES, 0.5)
        with pytest.raises(ValidationError):
            eigen_overlaps(np.zeros(8, dtype=complex), es)


def test_gap_grid_shape(signature):
    s_vals, grid = gap_grid(signature, LINEAR_CURVES, k=5, s_step=0.05)
    assert s_vals.shape == (21,)
    assert grid.shape == (21, 5)
    assert s_vals[0] == 0.0 and s_vals[-1] == 1.0
