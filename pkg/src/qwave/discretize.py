"""Spatial grid, finite-difference Laplacian, and Hamiltonian assembly.

Natural units ħ = m = 1 throughout.  The domain [a, b] is sampled on N
uniform nodes x_i = a + i*dx with dx = (b - a)/(N - 1); the wavefunction
is pinned to zero at both endpoints (Dirichlet), which the truncated
tridiagonal stencil encodes with no extra bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform 1D spatial grid.

    Attributes
    ----------
    a, b : domain endpoints, b > a
    n_points : number of nodes N (>= 3)
    dx : node spacing (b - a)/(N - 1)
    nodes : array of N coordinates, nodes[i] = a + i*dx
    """

    a: float
    b: float
    n_points: int
    dx: float
    nodes: np.ndarray


@dataclass(frozen=True)
class Laplacian:
    """Second-derivative operator: tridiagonal stencil (1, -2, 1)/dx^2.

    Stored dense; N is small enough that banded storage buys nothing.
    """

    n: int
    scale: float  # 1/dx^2
    matrix: np.ndarray


@dataclass(frozen=True)
class Hamiltonian:
    """Real symmetric H = -(1/2) L + diag(V)."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def make_grid(a: float, b: float, n_points: int) -> Grid:
    """Build a uniform grid on [a, b] with n_points nodes."""
    if not b > a:
        raise ValueError(f"domain endpoints must satisfy b > a, got a={a}, b={b}")
    if n_points < 3:
        raise ValueError(f"grid needs at least 3 points for an interior node, got {n_points}")
    dx = (b - a) / (n_points - 1)
    nodes = a + dx * np.arange(n_points, dtype=float)
    nodes.setflags(write=False)
    return Grid(float(a), float(b), int(n_points), dx, nodes)


def laplacian(grid: Grid) -> Laplacian:
    """Finite-difference Laplacian on the grid, Dirichlet boundaries.

    Interior rows apply (psi[i+1] - 2 psi[i] + psi[i-1])/dx^2; the stencil
    is exact for quadratics, so applying it to samples of x^2 gives 2 on
    every interior node.
    """
    n = grid.n_points
    scale = 1.0 / grid.dx**2
    mat = np.zeros((n, n))
    idx = np.arange(n)
    mat[idx, idx] = -2.0 * scale
    mat[idx[:-1], idx[:-1] + 1] = scale
    mat[idx[:-1] + 1, idx[:-1]] = scale
    mat.setflags(write=False)
    return Laplacian(n, scale, mat)


def potential_on_grid(grid: Grid, v: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Sample a potential function on the grid nodes."""
    values = np.asarray(v(grid.nodes), dtype=float)
    if values.shape != grid.nodes.shape:
        raise ValueError(f"potential returned shape {values.shape}, expected {grid.nodes.shape}")
    return values


def harmonic_potential(grid: Grid) -> np.ndarray:
    """V(x) = x^2 / 2, the shipped default potential."""
    return potential_on_grid(grid, lambda x: 0.5 * x**2)


def assemble_hamiltonian(lap: Laplacian, potential: np.ndarray) -> Hamiltonian:
    """H = -(1/2) L + diag(V); symmetric by construction."""
    potential = np.asarray(potential, dtype=float)
    if potential.shape != (lap.n,):
        raise ValueError(f"potential has shape {potential.shape}, Laplacian order is {lap.n}")
    mat = -0.5 * lap.matrix + np.diag(potential)
    mat.setflags(write=False)
    return Hamiltonian(mat)
