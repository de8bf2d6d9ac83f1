"""Independent oracles used to freeze expected values.

Everything here deliberately avoids the package's own pipelines: Gaussian
tails come from the error function, overlaps from dense quadrature on a
throwaway axis, optimal regions from exhaustive subset search, and the
two-cell benchmark from explicit 2x2 matrices.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import ndtr

from qtypical import Grid, GridState, Hamiltonian


def gaussian_density_tail(z: float) -> float:
    """P(X > z) for a standard normal, via the error function."""
    return float(1.0 - ndtr(z))


def packet_mass_left_of(cut: float, center: float, sigma: float) -> float:
    """Mass of |psi|^2 left of ``cut`` for an amplitude-width-sigma packet
    (the densities are normal with standard deviation sigma/sqrt(2))."""
    return float(ndtr((cut - center) / (sigma / np.sqrt(2.0))))


def min_overlap_two_normals(c1: float, c2: float, std: float,
                            n: int = 400_001, span: float = 12.0) -> float:
    """Quadrature of min of two unit-mass normal densities."""
    lo = min(c1, c2) - span * std
    hi = max(c1, c2) + span * std
    x = np.linspace(lo, hi, n)
    d1 = np.exp(-((x - c1) ** 2) / (2 * std ** 2)) / (std * np.sqrt(2 * np.pi))
    d2 = np.exp(-((x - c2) ** 2) / (2 * std ** 2)) / (std * np.sqrt(2 * np.pi))
    return float(np.trapezoid(np.minimum(d1, d2), x))


def exhaustive_best_region(target: np.ndarray, field: np.ndarray,
                           dx: float) -> tuple[float, frozenset]:
    """Minimize |E(mask) field - target| over all cell subsets.

    Returns the minimal squared distance and one attaining index set.
    """
    n = target.size
    best = np.inf
    best_cells: frozenset = frozenset()
    for bits in itertools.product((False, True), repeat=n):
        mask = np.array(bits)
        d = float(np.sum(np.abs(np.where(mask, field, 0.0) - target) ** 2) * dx)
        if d < best - 1e-18:
            best = d
            best_cells = frozenset(np.nonzero(mask)[0].tolist())
    return best, best_cells


def exhaustive_best_overlap_split(phi1: np.ndarray, phi2: np.ndarray,
                                  dx: float) -> float:
    """Minimize |E(~mask) phi1|^2 + |E(mask) phi2|^2 over all subsets."""
    n = phi1.size
    best = np.inf
    for bits in itertools.product((False, True), repeat=n):
        mask = np.array(bits)
        val = float((np.sum(np.abs(np.where(mask, 0.0, phi1)) ** 2)
                     + np.sum(np.abs(np.where(mask, phi2, 0.0)) ** 2)) * dx)
        best = min(best, val)
    return best


HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def hadamard_grid_system() -> tuple[Grid, Hamiltonian, GridState]:
    """Two-cell grid whose unit-time propagator is exactly the Hadamard.

    The kinetic term of a 2-cell grid is kappa/2 * [[1,-1],[-1,1]] with
    kappa = pi^2 / (2 m dx^2); choosing dx^2 = pi/sqrt(2) and the potential
    (pi/2 - pi/sqrt(2), pi/2) makes H = (pi/2)(I - Hadamard), whose
    exponential after unit time is the Hadamard itself.
    """
    dx = float(np.sqrt(np.pi / np.sqrt(2.0)))
    grid = Grid(n=2, x_min=0.0, dx=dx)
    pot = np.array([np.pi / 2.0 - np.pi / np.sqrt(2.0), np.pi / 2.0])
    h = Hamiltonian("tabulated", mass=1.0, potential=pot)
    amps = np.array([1.0 / np.sqrt(dx), 0.0], dtype=complex)
    return grid, h, GridState(grid, amps)


def dense_unitary_of(h: Hamiltonian, grid: Grid, t: float) -> np.ndarray:
    """Materialize U(t) column by column through the package propagator."""
    from qtypical import propagate

    cols = []
    for j in range(grid.n):
        amps = np.zeros(grid.n, dtype=complex)
        amps[j] = 1.0
        cols.append(propagate(GridState(grid, amps), h, t).amps)
    return np.stack(cols, axis=1)
