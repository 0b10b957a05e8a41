import numpy as np
import pytest

from qwave import spectral as sp
from qwave.discretize import Hamiltonian, assemble_hamiltonian, harmonic_potential, laplacian, make_grid
from qwave.errors import ConvergenceError
from qwave.state import WaveState

# 6 lowest eigenvalues of the default 200-point Hamiltonian, frozen from an
# independent dense eigensolve (LAPACK) before this module was built
DEFAULT_LOW_EIGENVALUES = [
    0.49992107543929071,
    1.4996053294172143,
    2.4989737599561699,
    3.4980268633610119,
    4.4967706960276974,
    5.4952495150169485,
]


def _random_symmetric(n: int, seed: int) -> Hamiltonian:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    return Hamiltonian((a + a.T) / 2.0)


class TestEigendecompose:
    def test_reconstructs_matrix(self):
        for seed, n in ((0, 5), (1, 17), (2, 30)):
            h = _random_symmetric(n, seed)
            d = sp.eigendecompose(h)
            rebuilt = d.eigenvectors @ np.diag(d.eigenvalues) @ d.eigenvectors.T
            assert np.allclose(rebuilt, h.matrix, atol=1e-12 * max(1.0, np.abs(h.matrix).max()))

    def test_orthogonal_eigenvectors(self):
        d = sp.eigendecompose(_random_symmetric(25, 3))
        gram = d.eigenvectors.T @ d.eigenvectors
        assert np.max(np.abs(gram - np.eye(25))) < 1e-13

    def test_matches_lapack_dense_path(self):
        # dual route: from-scratch Householder+QL against numpy's LAPACK
        h = _random_symmetric(30, 4)
        d = sp.eigendecompose(h)
        lam_ref = np.linalg.eigvalsh(h.matrix)
        assert np.max(np.abs(d.eigenvalues - lam_ref)) < 1e-12 * max(1.0, np.abs(lam_ref).max())

    def test_matches_lapack_tridiagonal_path(self, default_hamiltonian, default_decomposition):
        lam_ref = np.linalg.eigvalsh(default_hamiltonian.matrix)
        scale = np.abs(lam_ref).max()
        assert np.max(np.abs(default_decomposition.eigenvalues - lam_ref)) < 1e-9 * scale

    def test_eigenvalues_ascending(self, default_decomposition):
        lam = default_decomposition.eigenvalues
        assert np.all(np.diff(lam) >= 0.0)

    def test_default_low_spectrum(self, default_decomposition):
        # grid-converged values, not the continuum n + 1/2
        got = default_decomposition.eigenvalues[:6]
        assert np.allclose(got, DEFAULT_LOW_EIGENVALUES, atol=1e-9)

    def test_spectral_residual_default(self, default_hamiltonian, default_decomposition):
        h = default_hamiltonian.matrix
        q = default_decomposition.eigenvectors
        lam = default_decomposition.eigenvalues
        resid = np.max(np.abs(h @ q - q * lam[None, :]))
        assert resid <= 1e-8 * np.max(np.abs(h))

    def test_sign_convention(self):
        d = sp.eigendecompose(_random_symmetric(12, 5))
        anchors = np.argmax(np.abs(d.eigenvectors), axis=0)
        assert np.all(d.eigenvectors[anchors, np.arange(12)] > 0.0)

    def test_degenerate_spectrum(self):
        # identity block plus distinct entries: repeated eigenvalue 1
        h = Hamiltonian(np.diag([1.0, 1.0, 1.0, 2.0, 5.0]))
        d = sp.eigendecompose(h)
        assert np.allclose(d.eigenvalues, [1.0, 1.0, 1.0, 2.0, 5.0])
        assert np.max(np.abs(d.eigenvectors.T @ d.eigenvectors - np.eye(5))) < 1e-13

    def test_asymmetric_rejected(self):
        a = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            sp.eigendecompose(Hamiltonian(a))

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError):
            sp.eigendecompose(Hamiltonian(np.zeros((3, 4))))

    def test_convergence_error_surfaces(self, monkeypatch):
        monkeypatch.setattr(sp, "_MAX_QL_ITER", 0)
        with pytest.raises(ConvergenceError):
            sp.eigendecompose(_random_symmetric(8, 6))


class TestPropagator:
    def test_unitary(self, default_decomposition):
        u = sp.build_propagator(default_decomposition, 0.05)
        gram = u.matrix.conj().T @ u.matrix
        assert np.max(np.abs(gram - np.eye(u.n))) <= 1e-10

    def test_zero_step_is_identity(self, default_decomposition):
        u = sp.build_propagator(default_decomposition, 0.0)
        assert np.max(np.abs(u.matrix - np.eye(u.n))) < 1e-12

    def test_forward_backward_cancel(self):
        d = sp.eigendecompose(_random_symmetric(10, 7))
        uf = sp.build_propagator(d, 0.3)
        ub = sp.build_propagator(d, -0.3)
        assert np.max(np.abs(ub.matrix @ uf.matrix - np.eye(10))) < 1e-12

    def test_nonfinite_dt_rejected(self, default_decomposition):
        with pytest.raises(ValueError):
            sp.build_propagator(default_decomposition, float("nan"))

    def test_apply_advances_time(self):
        d = sp.eigendecompose(_random_symmetric(6, 8))
        u = sp.build_propagator(d, 0.1)
        psi = WaveState(np.ones(6, dtype=complex) / np.sqrt(6), 1.0)
        out = sp.apply_propagator(u, psi)
        assert out.time == pytest.approx(1.1)
        assert abs(np.vdot(out.amplitudes, out.amplitudes) - 1.0) < 1e-12

    def test_apply_shape_mismatch(self):
        d = sp.eigendecompose(_random_symmetric(6, 9))
        u = sp.build_propagator(d, 0.1)
        with pytest.raises(ValueError):
            sp.apply_propagator(u, WaveState(np.ones(5, dtype=complex), 0.0))


class TestSteppingVsDirect:
    def test_repeated_steps_match_direct(self, default_decomposition, default_grid):
        psi0 = WaveState(
            np.exp(-default_grid.nodes**2) / np.linalg.norm(np.exp(-default_grid.nodes**2)),
            0.0,
        )
        u = sp.build_propagator(default_decomposition, 0.05)
        psi = psi0
        for _ in range(20):  # t = 1.0
            psi = sp.apply_propagator(u, psi)
        direct = sp.propagate_direct(default_decomposition, psi0, 1.0)
        assert np.max(np.abs(psi.amplitudes - direct.amplitudes)) <= 1e-9

    def test_direct_shape_and_time_checks(self, default_decomposition):
        with pytest.raises(ValueError):
            sp.propagate_direct(default_decomposition, WaveState(np.ones(3, dtype=complex), 0.0), 1.0)
        psi = WaveState(np.zeros(default_decomposition.n, dtype=complex), 0.0)
        with pytest.raises(ValueError):
            sp.propagate_direct(default_decomposition, psi, float("inf"))


class TestEigenCsv:
    def test_layout(self, tmp_path):
        d = sp.eigendecompose(_random_symmetric(4, 10))
        path = tmp_path / "eigen.csv"
        sp.write_eigen_csv(d, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "eig_0,eig_1,eig_2,eig_3"
        assert len(lines) == 1 + 1 + 4
        lam_back = np.array([float(v) for v in lines[1].split(",")])
        assert np.array_equal(lam_back, d.eigenvalues)


class TestHarmonicOracle:
    def test_small_grid_spectrum_against_lapack(self):
        # dual route on a non-default grid too
        grid = make_grid(-4.0, 4.0, 80)
        h = assemble_hamiltonian(laplacian(grid), harmonic_potential(grid))
        d = sp.eigendecompose(h)
        lam_ref = np.linalg.eigvalsh(h.matrix)
        assert np.max(np.abs(d.eigenvalues - lam_ref)) < 1e-9 * np.abs(lam_ref).max()
