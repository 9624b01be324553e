"""Reference calculations that share no code path with the Bethe solver.

``single_particle_levels`` uses the textbook even/odd matching conditions of
the finite well. ``fd_two_body_energy`` diagonalises the two-particle
Hamiltonian on a grid

    H = -1/2 (d1^2 + d2^2) + V(x1) + V(x2) + c_hat delta(x1 - x2)

with V = -k0_hat^2/2 on |x| < 1/2 (trap units), the delta function
represented by c_hat/h on the grid diagonal x1 = x2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from scipy.optimize import brentq

from .units import TrapUnitsProblem


class OracleError(RuntimeError):
    pass


def single_particle_levels(k0_hat: float, n_levels: int) -> list[float]:
    """Bound levels (trap units) of a unit-width well of depth k0_hat**2/2, ascending.

    Even states: k tan(k/2) = kappa.  Odd states: -k cot(k/2) = kappa.
    Fewer than ``n_levels`` values come back when the well holds fewer.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    k0 = float(k0_hat)

    def kappa(k):
        return math.sqrt(max(k0 * k0 - k * k, 0.0))

    levels = []
    for n in range(1, n_levels + 1):
        lo = (n - 1) * math.pi           # branch interval ((n-1) pi, n pi) in k
        if lo >= k0:
            break
        hi = min(n * math.pi, k0)
        if n % 2:
            # even parity: tan(k/2) runs 0 -> +inf on this branch
            def f(k):
                return k * math.sin(k / 2) - kappa(k) * math.cos(k / 2)
        else:
            # odd parity: -cot(k/2) runs 0 -> +inf on this branch
            def f(k):
                return -k * math.cos(k / 2) - kappa(k) * math.sin(k / 2)
        eps = 1e-15 * max(1.0, hi)
        a, b = lo + eps, hi - eps if hi == n * math.pi else hi
        if f(a) * f(b) > 0:
            break
        k = brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        levels.append(0.5 * (k * k - k0 * k0))
    return levels


@dataclass(frozen=True)
class FdGridSpec:
    """Square grid on [-D, D]^2 with ``points_per_dimension`` nodes per axis.

    Nodes sit at (i + 1/2) h - D with h = 2D / points. The well edges must
    fall midway between nodes (1/(2h) an integer); otherwise the step in the
    potential adds an O(h) error that spoils the extrapolation.
    """

    points_per_dimension: int = 120
    domain_half_width: float = 0.75

    def __post_init__(self):
        if self.points_per_dimension < 64 or self.points_per_dimension % 2:
            raise ValueError("points_per_dimension must be even and >= 64")
        if not self.domain_half_width > 0.5:
            raise ValueError("domain_half_width must exceed the well half-width 1/2")
        cells = 0.5 / self.spacing
        if abs(cells - round(cells)) > 1e-9:
            raise ValueError(f"well edge not midway between nodes: 1/(2h) = {cells:.6g}; "
                             "choose points_per_dimension * 1/(4 D) integer")

    @property
    def spacing(self) -> float:
        return 2.0 * self.domain_half_width / self.points_per_dimension

    def refined(self) -> "FdGridSpec":
        return FdGridSpec(2 * self.points_per_dimension, self.domain_half_width)


def _symmetric_basis(n: int) -> sp.csr_matrix:
    """Orthonormal basis of the exchange-symmetric subspace of R^n (x) R^n."""
    i, j = np.triu_indices(n)
    cols = np.arange(i.size)
    diag = i == j
    rows = np.concatenate([i * n + j, (j * n + i)[~diag]])
    cols_all = np.concatenate([cols, cols[~diag]])
    vals = np.where(diag, 1.0, 1.0 / math.sqrt(2.0))
    vals_all = np.concatenate([vals, vals[~diag]])
    return sp.csr_matrix((vals_all, (rows, cols_all)), shape=(n * n, i.size))


def two_body_hamiltonian(problem: TrapUnitsProblem, grid: FdGridSpec) -> sp.csc_matrix:
    n = grid.points_per_dimension
    h = grid.spacing
    x = (np.arange(n) + 0.5) * h - grid.domain_half_width
    well = np.where(np.abs(x) < 0.5, -0.5 * problem.k0_hat**2, 0.0)
    one_body = (sp.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)],
                         [-1, 0, 1]) / (2.0 * h * h) + sp.diags(well))
    eye = sp.identity(n)
    contact = sp.diags((problem.c_hat / h) * np.eye(n).ravel())
    full = sp.kron(one_body, eye) + sp.kron(eye, one_body) + contact
    basis = _symmetric_basis(n)
    return (basis.T @ full @ basis).tocsc()


def fd_two_body_energy(problem: TrapUnitsProblem, grid: FdGridSpec = FdGridSpec()) -> float:
    """Lowest bosonic eigenvalue of the discretised two-body Hamiltonian."""
    if problem.n_particles != 2:
        raise ValueError("the grid oracle handles exactly two particles")
    ham = two_body_hamiltonian(problem, grid)
    # Every eigenvalue lies above 2 * min(V); shift-invert just below that.
    shift = -problem.k0_hat**2 - 1.0
    values, vectors = sla.eigsh(ham, k=1, sigma=shift, which="LM", tol=1e-12)
    energy, vec = float(values[0]), vectors[:, 0]
    res = np.linalg.norm(ham @ vec - energy * vec)
    if not res < 1e-6 * max(1.0, abs(energy)):
        raise OracleError(f"eigen-iteration residual {res:.3e} too large")
    return energy


def richardson_two_body_energy(problem: TrapUnitsProblem, grid: FdGridSpec = FdGridSpec(),
                               order: int = 2) -> tuple[float, float, float]:
    """Extrapolate grid energies at spacing h and h/2, assuming error ~ h**order.

    Returns (extrapolated, coarse, fine).
    """
    coarse = fd_two_body_energy(problem, grid)
    fine = fd_two_body_energy(problem, grid.refined())
    factor = 2.0**order
    return (factor * fine - coarse) / (factor - 1.0), coarse, fine
