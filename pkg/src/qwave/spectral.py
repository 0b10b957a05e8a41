"""Real-symmetric eigendecomposition and the exact unitary propagator.

H = Q diag(lam) Q^T is computed with Householder reduction to tridiagonal
form followed by the implicit-shift QL iteration, accumulating the full
eigenvector matrix.  The Hamiltonian from `discretize` is already
tridiagonal, so the reduction step is skipped for it.  The propagator is
then exactly U(dt) = Q diag(exp(-i lam dt)) Q^T, so repeated stepping
carries no splitting error and stays unitary to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discretize import Hamiltonian
from .errors import ConvergenceError
from .state import WaveState

_EPS = np.finfo(float).eps
_MAX_QL_ITER = 50


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthogonal eigenvector columns of H."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class Propagator:
    """One-timestep unitary U(dt) = Q exp(-i lam dt) Q^T."""

    dt: float
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _is_tridiagonal(a: np.ndarray) -> bool:
    n = a.shape[0]
    if n <= 2:
        return True
    mask = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) > 1
    return not np.any(a[mask])


def _householder_tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce symmetric a to tridiagonal T = Z^T a Z, returning (d, e, Z).

    d holds the diagonal of T, e[i] the subdiagonal coupling nodes i and
    i+1 (length n, last entry unused), Z the accumulated orthogonal
    transform.  Classic tred2 recurrences, vectorized row-wise.
    """
    z = np.array(a, dtype=float, copy=True)
    n = z.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)

    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        if l > 0:
            scale = np.sum(np.abs(z[i, :i]))
            if scale == 0.0:
                e[i] = z[i, l]
            else:
                z[i, :i] /= scale
                h = float(z[i, :i] @ z[i, :i])
                f = z[i, l]
                g = -math.copysign(math.sqrt(h), f)
                e[i] = scale * g
                h -= f * g
                z[i, l] = f - g
                # p = (a u)/h using the lower triangle only
                z[:i, i] = z[i, :i] / h
                for j in range(i):
                    e[j] = (z[j, : j + 1] @ z[i, : j + 1] + z[j + 1 : i, j] @ z[i, j + 1 : i]) / h
                hh = float(e[:i] @ z[i, :i]) / (h + h)
                e[:i] -= hh * z[i, :i]
                # rank-two update a <- a - u w^T - w u^T
                for j in range(i):
                    f = z[i, j]
                    g = e[j]
                    z[j, : j + 1] -= f * e[: j + 1] + g * z[i, : j + 1]
        else:
            e[i] = z[i, l]
        d[i] = h

    d[0] = 0.0
    e[0] = 0.0
    # accumulate the transformations into z
    for i in range(n):
        if d[i] != 0.0:
            gv = z[i, :i] @ z[:i, :i]
            z[:i, :i] -= np.outer(z[:i, i], gv)
        d[i] = z[i, i]
        z[i, i] = 1.0
        z[i, :i] = 0.0
        z[:i, i] = 0.0
    return d, e, z


def _ql_implicit(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    d: diagonal, e: subdiagonal with e[i] coupling nodes i and i+1
    (e[n-1] ignored), z: matrix whose columns the rotations are applied
    to (identity, or the Householder accumulation).  Returns eigenvalues
    (unsorted) and eigenvector columns.
    """
    n = d.shape[0]
    d = np.array(d, dtype=float, copy=True)
    e = np.append(np.asarray(e, dtype=float)[: n - 1], 0.0)
    z = np.array(z, dtype=float, copy=True)

    for l in range(n):
        iters = 0
        while True:
            for m in range(l, n - 1):
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
            else:
                m = n - 1
            if m == l:
                break
            iters += 1
            if iters > _MAX_QL_ITER:
                raise ConvergenceError(
                    f"QL iteration for eigenvalue {l} did not converge "
                    f"within {_MAX_QL_ITER} sweeps (|e|={abs(e[l]):.3e})"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # rotation underflow: drop the shift and restart the sweep
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * col
                z[:, i] = c * z[:, i] - s * col
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return d, z


def eigendecompose(h: Hamiltonian) -> SpectralDecomposition:
    """Factor a symmetric Hamiltonian as H = Q diag(lam) Q^T.

    Eigenvalues are sorted ascending; each eigenvector column is signed
    so its largest-magnitude entry is positive, which makes the
    decomposition reproducible across runs.
    """
    a = np.asarray(h.matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Hamiltonian matrix must be square, got shape {a.shape}")
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValueError("Hamiltonian matrix is not symmetric within 1e-12 relative tolerance")

    if _is_tridiagonal(a):
        d = np.diag(a).copy()
        e = np.append(np.diag(a, k=-1).copy(), 0.0)
        z = np.eye(a.shape[0])
    else:
        d, e_full, z = _householder_tridiagonalize(a)
        e = np.append(e_full[1:], 0.0)  # shift so e[i] couples nodes i, i+1

    lam, q = _ql_implicit(d, e, z)

    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    q = q[:, order]
    # sign convention: largest-magnitude entry of each column is positive
    anchors = np.argmax(np.abs(q), axis=0)
    flip = q[anchors, np.arange(q.shape[1])] < 0.0
    q[:, flip] *= -1.0

    lam.setflags(write=False)
    q.setflags(write=False)
    return SpectralDecomposition(lam, q)


def build_propagator(decomp: SpectralDecomposition, dt: float) -> Propagator:
    """U(dt) = Q diag(exp(-i lam dt)) Q^T; dt may be zero or negative."""
    if not math.isfinite(dt):
        raise ValueError(f"time step must be finite, got {dt}")
    phases = np.exp(-1j * decomp.eigenvalues * dt)
    u = (decomp.eigenvectors * phases[None, :]) @ decomp.eigenvectors.T
    u.setflags(write=False)
    return Propagator(float(dt), u)


def apply_propagator(u: Propagator, psi: WaveState) -> WaveState:
    """Advance psi by one step: psi(t + dt) = U(dt) psi(t)."""
    if psi.amplitudes.shape != (u.n,):
        raise ValueError(
            f"state has {psi.amplitudes.shape[0]} amplitudes, propagator order is {u.n}"
        )
    amps = u.matrix @ psi.amplitudes
    amps.setflags(write=False)
    return WaveState(amps, psi.time + u.dt)


def propagate_direct(decomp: SpectralDecomposition, psi0: WaveState, t: float) -> WaveState:
    """Evaluate psi(t) = Q exp(-i lam t) Q^T psi(0) in one shot.

    Mathematically identical to repeated stepping; exposed for
    spot-checking the step loop at arbitrary times.
    """
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if psi0.amplitudes.shape != (decomp.n,):
        raise ValueError(
            f"state has {psi0.amplitudes.shape[0]} amplitudes, decomposition order is {decomp.n}"
        )
    coeffs = decomp.eigenvectors.T @ psi0.amplitudes
    amps = decomp.eigenvectors @ (np.exp(-1j * decomp.eigenvalues * t) * coeffs)
    amps.setflags(write=False)
    return WaveState(amps, psi0.time + t)


def write_eigen_csv(decomp: SpectralDecomposition, path) -> None:
    """Debug dump of (lam, Q): header, one eigenvalue row, then Q row by row."""
    n = decomp.n
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"eig_{k}" for k in range(n)) + "\n")
        fh.write(",".join(f"{v:.17g}" for v in decomp.eigenvalues) + "\n")
        for row in decomp.eigenvectors:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
