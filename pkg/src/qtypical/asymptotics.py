"""Finite-time and asymptotic velocity projectors.

The finite-time projector onto a velocity region scales the region by the
elapsed time, projects in position space in the evolved frame and pulls
back: ``F_t(Dv) = U(-t) E(t Dv) U(t)``. Its strong limit for free dynamics
is the momentum-space projection ``F+(Dv)`` onto ``{k : k/m in Dv}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .csets import CSet, cset_vector
from .errors import ContractError, UnsupportedDynamicsError
from .grid import (
    GridState,
    Hamiltonian,
    Region,
    VelocityRegion,
    check_universal,
    distance_sq,
    momentum_amplitudes,
    momentum_project,
    project,
    propagate,
)


def scaled_region(dv: VelocityRegion, t: float) -> Region:
    """Spatial region ``t Dv = {v t : v in Dv}`` on the grid.

    At ``t = 0`` the product degenerates: the region is the full grid when
    ``Dv`` contains velocity zero and empty otherwise.
    """
    grid = dv.grid
    if t == 0.0:
        inside = bool(dv.contains_velocity(0.0))
        return Region.full(grid) if inside else Region.empty(grid)
    return Region(grid, dv.contains_velocity(grid.x / t))


def f_projector(dv: VelocityRegion, t: float, psi: GridState,
                h: Hamiltonian) -> GridState:
    """Apply ``F_t(Dv)`` for finite ``t`` or ``F+(Dv)`` for ``t = inf``.

    The asymptotic projector is exact only for free dynamics; for other
    Hamiltonians use a large finite ``t`` as an approximation.
    """
    if math.isinf(t):
        if not h.is_free:
            raise UnsupportedDynamicsError(
                "the asymptotic velocity projector is exact only for free "
                "dynamics; evaluate f_projector at a large finite time instead")
        return momentum_project(psi, dv)
    if t < 0:
        raise ContractError(f"f_projector expects t >= 0, got {t}")
    moved = propagate(psi, h, t)
    masked = project(moved, scaled_region(dv, t))
    return propagate(masked, h, -t)


@dataclass(frozen=True)
class ConvergenceProfile:
    """Distances ``|F_t(Dv) psi - F+(Dv) psi|`` over a time schedule."""

    times: np.ndarray
    distances: np.ndarray
    threshold: float
    t_converged: float | None      # first sample at or below the threshold
    converged: bool

    @property
    def final_distance(self) -> float:
        return float(self.distances[-1])


def convergence_profile(dv: VelocityRegion, psi: GridState, h: Hamiltonian,
                        times: np.ndarray,
                        threshold: float = 0.05) -> ConvergenceProfile:
    """Sample the approach of the finite-time projector to its limit."""
    if not h.is_free:
        raise UnsupportedDynamicsError(
            "convergence against the asymptotic projector needs free dynamics")
    times = np.asarray(times, dtype=float)
    limit = momentum_project(psi, dv)
    dist = np.empty(times.size)
    for i, t in enumerate(times):
        dist[i] = math.sqrt(distance_sq(f_projector(dv, t, psi, h), limit))
    below = np.nonzero(dist <= threshold)[0]
    t_conv = float(times[below[0]]) if below.size else None
    return ConvergenceProfile(times, dist, threshold, t_conv,
                              converged=below.size > 0)


def optimal_velocity_region(c: CSet, psi0: GridState,
                            h: Hamiltonian) -> VelocityRegion:
    """Velocity region whose asymptotic projection best approximates
    ``C psi0``, cell by cell in momentum space (strict inequality)."""
    check_universal(psi0)
    if not h.is_free:
        raise UnsupportedDynamicsError(
            "the optimal velocity region needs free dynamics")
    psi_k = momentum_amplitudes(psi0)
    chi_k = momentum_amplitudes(cset_vector(c, psi0, h))
    mask = np.abs(psi_k) ** 2 < 2.0 * np.real(np.conj(psi_k) * chi_k)
    return VelocityRegion(psi0.grid, mask, h.mass)


def asymptotic_overlap_limit(c: CSet, psi0: GridState, h: Hamiltonian) -> float:
    """Limit of the packet/complement overlap at time infinity:
    ``|C psi0 - F+(best Dv) psi0|^2 / |C psi0|^2``."""
    best = optimal_velocity_region(c, psi0, h)
    v = cset_vector(c, psi0, h)
    approx = momentum_project(psi0, best)
    weight = v.norm_sq
    if weight < 1e-14:
        raise ContractError("asymptotic overlap limit: |C psi0|^2 is degenerate")
    return distance_sq(v, approx) / weight
