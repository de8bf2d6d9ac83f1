"""Overlap of wave packets and the packet-tracking inequalities.

The overlapping measure of two states is

    w(phi1, phi2) = integral min(|phi1|^2, |phi2|^2) dx
                    / min(|phi1|^2, |phi2|^2),

equivalently the infimum over regions of the mass of phi1 outside plus the
mass of phi2 inside, attained at the splitting region {|phi1| > |phi2|}.
Both routes are evaluated and must agree to 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .csets import CSet, cset_vector
from .errors import ContractError, DegenerateInputError, NumericsError
from .grid import (
    GridState,
    Hamiltonian,
    Region,
    check_universal,
    project,
    propagate,
)
from .prob import DEFAULT_EPS
from .quantum import quantum_chain_bound

DUAL_FORM_TOL = 1e-10
ZERO_DENOM = 1e-14
# slack on the "minority weight <= 1/2" preconditions; symmetric scenarios
# sit exactly at 1/2 and constructed regions land within grid noise of it
HALF_WEIGHT_TOL = 1e-6


def splitting_region(phi1: GridState, phi2: GridState) -> Region:
    """Cells where ``|phi1| > |phi2|`` strictly; minimizes the overlap form."""
    phi1._check_compatible(phi2)
    return Region(phi1.grid, np.abs(phi1.amps) > np.abs(phi2.amps))


def overlapping_measure(phi1: GridState, phi2: GridState) -> float:
    """Overlap in [0, 1]; 0 means disjoint supports."""
    phi1._check_compatible(phi2)
    denom = min(phi1.norm_sq, phi2.norm_sq)
    if denom < ZERO_DENOM:
        raise DegenerateInputError("overlapping measure: a state is (near-)zero")
    dens1 = np.abs(phi1.amps) ** 2
    dens2 = np.abs(phi2.amps) ** 2
    direct = float(np.minimum(dens1, dens2).sum() * phi1.grid.dx) / denom
    split = splitting_region(phi1, phi2)
    at_min = (project(phi1, split.complement()).norm_sq
              + project(phi2, split).norm_sq) / denom
    if abs(direct - at_min) > DUAL_FORM_TOL:
        raise NumericsError(
            f"overlap routes disagree: {direct!r} vs {at_min!r}")
    return min(direct, 1.0) if direct <= 1.0 + 1e-12 else _overflow(direct)


def _overflow(value: float) -> float:
    raise NumericsError(f"overlapping measure left [0, 1]: {value!r}")


def is_support(region: Region, phi: GridState, eps: float) -> bool:
    """True iff the relative mass of ``phi`` outside the region is <= eps."""
    if phi.norm_sq < ZERO_DENOM:
        raise DegenerateInputError("support test: state is (near-)zero")
    leak = (phi - project(phi, region)).norm_sq / phi.norm_sq
    return leak <= eps


@dataclass(frozen=True)
class OverlapProfile:
    """Time-resolved overlap of an s-set packet against its complement.

    Per sample: the overlap ``w``, the mutual typicality of the s-set with
    the best region at that time (a lower bound on w) and its
    min-normalized variant (an upper bound). ``support_witnesses`` records,
    for samples where the mutual typicality is inside the regime, the
    actual leak of the evolved packet outside the best region together
    with the chain bound it must respect.
    """

    times: np.ndarray
    w: np.ndarray
    m_lower: np.ndarray
    m3_upper: np.ndarray
    support_witnesses: list[dict]

    def max_w(self) -> float:
        return float(self.w.max())


def split_packets(s1: CSet, t: float, psi0: GridState,
                  h: Hamiltonian) -> tuple[GridState, GridState]:
    """The evolved s-set packet and its complement packet at time ``t``."""
    packet0 = cset_vector(s1, psi0, h)
    moved = propagate(packet0, h, t)
    rest = propagate(psi0, h, t) - moved
    return moved, rest


def packet_overlap_profile(s1: CSet, times: np.ndarray, psi0: GridState,
                           h: Hamiltonian,
                           eps: float = DEFAULT_EPS) -> OverlapProfile:
    """Track the overlap of the s-set packet with its complement over time.

    Requires ``|S1 psi0|^2 <= 1/2`` so the packet is the smaller branch.
    """
    check_universal(psi0)
    times = np.asarray(times, dtype=float)
    packet0 = cset_vector(s1, psi0, h)
    weight = packet0.norm_sq
    if weight > 0.5 + HALF_WEIGHT_TOL:
        raise ContractError(
            f"packet weight {weight!r} exceeds 1/2; the overlap bounds assume "
            "the s-set carries the minority weight")
    if weight < ZERO_DENOM:
        raise DegenerateInputError("packet weight is degenerate")

    w_vals = np.empty(times.size)
    m_lower = np.empty(times.size)
    m3_upper = np.empty(times.size)
    witnesses: list[dict] = []
    for i, t in enumerate(times):
        moved, rest = split_packets(s1, t, psi0, h)
        w_vals[i] = overlapping_measure(moved, rest)
        best = splitting_region(moved, rest)
        best_state = project(propagate(psi0, h, t), best)
        dist_sq = (moved - best_state).norm_sq
        m1 = dist_sq / max(weight, best_state.norm_sq)
        denom3 = min(weight, best_state.norm_sq)
        m_lower[i] = m1
        m3_upper[i] = dist_sq / denom3 if denom3 >= ZERO_DENOM else math.inf
        if m1 <= eps:
            leak = (moved - project(moved, best)).norm_sq / weight
            bound = quantum_chain_bound(m1) if m1 < 1.0 else math.inf
            witnesses.append({
                "time": float(t),
                "m1": float(m1),
                "leak": float(leak),
                "bound": float(bound),
                "ok": bool(leak <= bound + 1e-12),
            })
    return OverlapProfile(times, w_vals, m_lower, m3_upper, witnesses)
