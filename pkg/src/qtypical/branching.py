"""Subtree-support scanning, subtree construction and branch verification.

An s-set is a subtree-support when its evolved packet stays non-overlapping
with the complement packet at every later sampled time. A subtree is a
time-indexed family of regions whose s-sets are pairwise mutually typical;
a branch additionally orders them by relative typicality. Continuous-time
quantifiers are approximated by a sampling schedule that is always part of
the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import asymptotic_overlap_limit
from .csets import CSet, cset_vector
from .errors import ContractError
from .grid import (
    GridState,
    Hamiltonian,
    Region,
    check_universal,
    project,
    propagate,
)
from .overlap import (
    HALF_WEIGHT_TOL,
    OverlapProfile,
    packet_overlap_profile,
    splitting_region,
    split_packets,
)
from .prob import DEFAULT_EPS
from .quantum import quantum_relative_general

ZERO_DENOM = 1e-14


@dataclass(frozen=True)
class TimeRegionMap:
    """One region per sampled time, on a shared grid."""

    times: np.ndarray
    regions: list

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        if len(self.regions) != times.size:
            raise ContractError("need exactly one region per time sample")
        grids = {r.grid for r in self.regions}
        if len(grids) > 1:
            raise ContractError("all regions must share one grid geometry")
        object.__setattr__(self, "times", times)

    def cset(self, i: int) -> CSet:
        return CSet(float(self.times[i]), self.regions[i])


@dataclass(frozen=True)
class BranchReport:
    """Outcome of a scan or a pairwise check at a given threshold."""

    label: str
    eps: float
    max_value: float
    passed: bool
    entries: list          # (t,) or (t1, t2) keyed values
    witnesses: list        # entries exceeding eps
    warnings: list

    def __bool__(self) -> bool:
        return self.passed


def _require_minority_weight(weight: float, what: str) -> None:
    if weight > 0.5 + HALF_WEIGHT_TOL:
        raise ContractError(
            f"{what}: s-set weight {weight!r} exceeds 1/2")
    if weight < ZERO_DENOM:
        raise ContractError(f"{what}: s-set weight is degenerate")


def subtree_support_scan(s1: CSet, times: np.ndarray, psi0: GridState,
                         h: Hamiltonian,
                         eps: float = DEFAULT_EPS) -> BranchReport:
    """Overlap of the s-set packet with its complement at each sampled time."""
    check_universal(psi0)
    weight = cset_vector(s1, psi0, h).norm_sq
    _require_minority_weight(weight, "subtree-support scan")
    profile: OverlapProfile = packet_overlap_profile(s1, times, psi0, h, eps)
    entries = [(float(t), float(w)) for t, w in zip(profile.times, profile.w)]
    witnesses = [(t, w) for t, w in entries if w > eps]
    max_w = profile.max_w()
    return BranchReport("subtree_support_scan", eps, max_w,
                        max_w <= eps, entries, witnesses, [])


def build_subtree(s1: CSet, times: np.ndarray, psi0: GridState,
                  h: Hamiltonian,
                  eps: float = DEFAULT_EPS) -> tuple[TimeRegionMap, BranchReport]:
    """Construct the tracked-region family and verify pairwise typicality.

    Each region is the splitting region of the evolved packet against its
    complement packet (the exact minimizer of the defining overlap), and
    all ordered pairs of the resulting s-sets are checked for mutual
    typicality at ``eps``.
    """
    scan = subtree_support_scan(s1, times, psi0, h, eps)
    if not scan.passed:
        raise ContractError(
            "subtree construction refused: the s-set is not a subtree-support "
            f"at eps={eps} (worst overlap {scan.max_value!r})")
    times = np.asarray(times, dtype=float)
    regions = []
    vectors = np.empty((times.size, psi0.grid.n), dtype=complex)
    for i, t in enumerate(times):
        moved, rest = split_packets(s1, float(t), psi0, h)
        region = splitting_region(moved, rest)
        regions.append(region)
        tracked = propagate(project(propagate(psi0, h, float(t)), region),
                            h, -float(t))
        vectors[i] = tracked.amps

    # pairwise m values from the Gram matrix of the tracked s-set states
    gram = (vectors @ vectors.conj().T) * psi0.grid.dx
    norms = np.real(np.diagonal(gram)).copy()
    entries = []
    witnesses = []
    worst = 0.0
    for i in range(times.size):
        for j in range(i + 1, times.size):
            dist = norms[i] + norms[j] - 2.0 * gram[i, j].real
            m = dist / max(norms[i], norms[j])
            entries.append((float(times[i]), float(times[j]), float(m)))
            if m > worst:
                worst = m
            if m > eps:
                witnesses.append((float(times[i]), float(times[j]), float(m)))
    report = BranchReport("build_subtree", eps, worst, worst <= eps,
                          entries, witnesses, [])
    return TimeRegionMap(times, regions), report


def asymptotic_support_check(s1: CSet, psi0: GridState, h: Hamiltonian,
                             eps: float = DEFAULT_EPS) -> bool:
    """Whether the packet/complement overlap stays small at time infinity."""
    check_universal(psi0)
    weight = cset_vector(s1, psi0, h).norm_sq
    _require_minority_weight(weight, "asymptotic support check")
    return asymptotic_overlap_limit(s1, psi0, h) <= eps


@dataclass(frozen=True)
class IrreducibleReport:
    """Per-candidate verdicts for the irreducibility test."""

    irreducible: bool
    eps: float
    lebesgue_eps: float
    candidates: list   # dicts with the candidate verdict details


def irreducible_check(s: CSet, candidates: list, psi0: GridState,
                      h: Hamiltonian, eps: float = DEFAULT_EPS,
                      lebesgue_eps: float = 0.15) -> IrreducibleReport:
    """Test whether any contained asymptotic support is properly smaller.

    Every candidate region contained in ``s`` that is itself an asymptotic
    subtree-support must stay close to ``s`` both in typicality and in
    Lebesgue measure; one violating candidate refutes irreducibility. The
    verdict only quantifies over the supplied candidate family.
    """
    check_universal(psi0)
    if not asymptotic_support_check(s, psi0, h, eps):
        raise ContractError(
            "irreducibility is only defined for asymptotic subtree-supports")
    v_s = cset_vector(s, psi0, h)
    rows = []
    irreducible = True
    for cand in candidates:
        if (cand.mask & ~s.region.mask).any():
            raise ContractError("candidate region is not contained in the s-set")
        c_set = CSet(s.time, cand)
        v_c = cset_vector(c_set, psi0, h)
        weight = v_c.norm_sq
        row = {"lebesgue": cand.lebesgue, "weight": weight}
        if weight < ZERO_DENOM or weight > 0.5 + HALF_WEIGHT_TOL:
            row["is_asymptotic_support"] = False
            row["reason"] = "weight outside (0, 1/2]"
        else:
            supp = asymptotic_overlap_limit(c_set, psi0, h) <= eps
            row["is_asymptotic_support"] = bool(supp)
            if supp:
                m = (v_s - v_c).norm_sq / max(v_s.norm_sq, weight)
                leb = ((s.region ^ cand).lebesgue
                       / max(s.region.lebesgue, cand.lebesgue))
                row["mutual"] = m
                row["lebesgue_ratio"] = leb
                row["violation"] = bool(m > eps or leb > lebesgue_eps)
                if row["violation"]:
                    irreducible = False
        rows.append(row)
    return IrreducibleReport(irreducible, eps, lebesgue_eps, rows)


def default_shrinkage_candidates(region: Region,
                                 fractions=(0.02, 0.05, 0.25, 0.5)) -> list:
    """Interval-shrinkage family for an interval-like region.

    For each fraction f, three candidates: trim f of the width from the
    left, from the right, and f/2 from both sides.
    """
    idx = np.nonzero(region.mask)[0]
    if idx.size == 0:
        raise ContractError("cannot shrink an empty region")
    lo, hi = int(idx[0]), int(idx[-1]) + 1
    width = hi - lo
    out = [region]
    for f in fractions:
        cut = max(1, int(round(f * width)))
        for a, b in ((lo + cut, hi), (lo, hi - cut),
                     (lo + cut // 2, hi - (cut - cut // 2))):
            if b - a <= 0:
                continue
            mask = np.zeros(region.grid.n, dtype=bool)
            mask[a:b] = True
            mask &= region.mask
            out.append(Region(region.grid, mask))
    return out


def branch_verify(region_map: TimeRegionMap, psi0: GridState, h: Hamiltonian,
                  eps: float = DEFAULT_EPS) -> BranchReport:
    """Relative typicality of earlier map members given later ones.

    All ordered pairs are evaluated with the optimal-region relative
    typicality; small-denominator warnings are surfaced in the report.
    """
    check_universal(psi0)
    times = region_map.times
    for i in range(times.size):
        weight = cset_vector(region_map.cset(i), psi0, h).norm_sq
        _require_minority_weight(weight, f"branch weight at t={times[i]!r}")
    entries = []
    witnesses = []
    warnings = []
    worst = 0.0
    for i in range(times.size):
        for j in range(i, times.size):
            val = quantum_relative_general(
                region_map.cset(i), region_map.cset(j), psi0, h, eps)
            entries.append((float(times[i]), float(times[j]), val.value))
            if val.warning:
                warnings.append((float(times[i]), float(times[j])))
            if val.value > worst:
                worst = val.value
            if val.value > eps:
                witnesses.append((float(times[i]), float(times[j]), val.value))
    return BranchReport("branch_verify", eps, worst, worst <= eps,
                        entries, witnesses, warnings)
