import numpy as np
import pytest

from qwave import discretize as dz


class TestMakeGrid:
    def test_default_spacing_and_endpoints(self):
        grid = dz.make_grid(-5.0, 5.0, 200)
        assert grid.dx == pytest.approx(10.0 / 199)
        assert grid.nodes[0] == -5.0
        assert grid.nodes[-1] == pytest.approx(5.0)
        assert grid.nodes.shape == (200,)

    def test_nodes_are_uniform(self):
        grid = dz.make_grid(-2.0, 3.0, 57)
        steps = np.diff(grid.nodes)
        assert np.allclose(steps, grid.dx, rtol=0, atol=1e-14)

    def test_invalid_interval_rejected(self):
        with pytest.raises(ValueError):
            dz.make_grid(1.0, 1.0, 10)
        with pytest.raises(ValueError):
            dz.make_grid(2.0, -2.0, 10)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            dz.make_grid(-1.0, 1.0, 2)

    def test_nodes_immutable(self):
        grid = dz.make_grid(-1.0, 1.0, 5)
        with pytest.raises(ValueError):
            grid.nodes[0] = 99.0


class TestLaplacian:
    def test_stencil_values(self):
        grid = dz.make_grid(-1.0, 1.0, 5)
        lap = dz.laplacian(grid)
        s = 1.0 / grid.dx**2
        assert np.allclose(np.diag(lap.matrix), -2.0 * s)
        assert np.allclose(np.diag(lap.matrix, 1), s)
        assert np.allclose(np.diag(lap.matrix, -1), s)

    def test_dirichlet_truncation(self):
        # no wrap-around coupling between the endpoints
        lap = dz.laplacian(dz.make_grid(-1.0, 1.0, 6))
        assert lap.matrix[0, -1] == 0.0
        assert lap.matrix[-1, 0] == 0.0

    def test_symmetric(self):
        lap = dz.laplacian(dz.make_grid(-3.0, 1.0, 17))
        assert np.array_equal(lap.matrix, lap.matrix.T)


class TestPotential:
    def test_harmonic_values(self):
        grid = dz.make_grid(-5.0, 5.0, 200)
        v = dz.harmonic_potential(grid)
        assert v[0] == pytest.approx(12.5)
        assert v[-1] == pytest.approx(12.5)
        assert np.min(v) >= 0.0
        assert np.allclose(v, 0.5 * grid.nodes**2)

    def test_custom_potential_hook(self):
        grid = dz.make_grid(0.0, 1.0, 5)
        v = dz.potential_on_grid(grid, lambda x: 3.0 * x)
        assert np.allclose(v, 3.0 * grid.nodes)

    def test_wrong_shape_rejected(self):
        grid = dz.make_grid(0.0, 1.0, 5)
        with pytest.raises(ValueError):
            dz.potential_on_grid(grid, lambda x: np.ones(3))


class TestHamiltonian:
    def test_assembly_formula(self):
        grid = dz.make_grid(-1.0, 1.0, 7)
        lap = dz.laplacian(grid)
        v = dz.harmonic_potential(grid)
        h = dz.assemble_hamiltonian(lap, v)
        assert np.allclose(h.matrix, -0.5 * lap.matrix + np.diag(v))
        assert np.array_equal(h.matrix, h.matrix.T)

    def test_default_corner_entries(self, default_hamiltonian):
        # independently derived: 1/dx^2 + 12.5 and -1/(2 dx^2) at dx = 10/199
        dx = 10.0 / 199
        assert default_hamiltonian.matrix[0, 0] == pytest.approx(1.0 / dx**2 + 12.5)
        assert default_hamiltonian.matrix[0, 1] == pytest.approx(-0.5 / dx**2)
        assert default_hamiltonian.matrix[0, 0] == pytest.approx(408.51, rel=1e-4)
        assert default_hamiltonian.matrix[0, 1] == pytest.approx(-198.005, rel=1e-4)

    def test_dimension_mismatch_rejected(self):
        lap = dz.laplacian(dz.make_grid(-1.0, 1.0, 5))
        with pytest.raises(ValueError):
            dz.assemble_hamiltonian(lap, np.zeros(6))
