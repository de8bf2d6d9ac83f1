"""Single-time cylinder sets and their Heisenberg-picture action on states.

A spatial s-set ``(t, Delta)`` collects the trajectories that sit inside
``Delta`` at time ``t``; the corresponding operator on the initial state is
``U(-t) E(Delta) U(t)``. An asymptotic s-set ``(inf, Delta_v)`` collects
trajectories whose asymptotic velocity lies in ``Delta_v``; for free
dynamics its operator is the momentum-space projection onto
``{k : k/m in Delta_v}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, UnsupportedDynamicsError
from .grid import (
    GridState,
    Hamiltonian,
    Region,
    VelocityRegion,
    check_universal,
    momentum_project,
    project,
    propagate,
)


@dataclass(frozen=True)
class CSet:
    """Time-tagged region: spatial for finite time, velocity for time inf."""

    time: float
    region: Region | VelocityRegion

    def __post_init__(self) -> None:
        if math.isinf(self.time):
            if not isinstance(self.region, VelocityRegion):
                raise ConfigError("asymptotic s-sets need a velocity region")
        else:
            if self.time < 0:
                raise ConfigError(f"s-set time must be >= 0, got {self.time}")
            if not isinstance(self.region, Region):
                raise ConfigError("finite-time s-sets need a spatial region")

    @classmethod
    def spatial(cls, time: float, region: Region) -> "CSet":
        return cls(time, region)

    @classmethod
    def asymptotic(cls, vregion: VelocityRegion) -> "CSet":
        return cls(math.inf, vregion)

    @property
    def is_asymptotic(self) -> bool:
        return math.isinf(self.time)


def cset_apply(c: CSet, psi0: GridState, h: Hamiltonian) -> GridState:
    """Apply the s-set operator to the initial state.

    Finite time: ``U(-t) E(Delta) U(t) psi0``. Time inf requires free
    dynamics and applies the asymptotic-velocity projection.
    """
    check_universal(psi0)
    if c.is_asymptotic:
        if not h.is_free:
            raise UnsupportedDynamicsError(
                "asymptotic s-sets are exact only for free dynamics; "
                "use asymptotics.f_projector with a finite time instead")
        return momentum_project(psi0, c.region)
    evolved = propagate(psi0, h, c.time)
    return propagate(project(evolved, c.region), h, -c.time)


def cset_vector(c: CSet, psi0: GridState, h: Hamiltonian) -> GridState:
    """Alias of :func:`cset_apply` without the normalization check, for
    internal pipelines that already validated ``psi0``."""
    if c.is_asymptotic:
        if not h.is_free:
            raise UnsupportedDynamicsError(
                "asymptotic s-sets are exact only for free dynamics")
        return momentum_project(psi0, c.region)
    evolved = propagate(psi0, h, c.time)
    return propagate(project(evolved, c.region), h, -c.time)


def born_weight(c: CSet, psi0: GridState, h: Hamiltonian) -> float:
    """Single-time weight ``|E(Delta) psi(t)|^2`` (or its asymptotic analog)."""
    return cset_apply(c, psi0, h).norm_sq
