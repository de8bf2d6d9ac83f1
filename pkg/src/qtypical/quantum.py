"""Quantum typicality functions over s-sets.

Writing ``S psi0`` for the Heisenberg-picture action of an s-set on the
initial state, the mutual typicality function is

    m(S1, S2) = |S1 psi0 - S2 psi0|^2 / max(|S1 psi0|^2, |S2 psi0|^2),

with mean- and min-normalized variants and a square-root variant. The
absolute, relative and measure kinds derive from it. Every function here
evaluates its value along two independent routes (position frame vs.
propagated frame, or the two published algebraic forms) and raises
``NumericsError`` if the routes disagree beyond 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .csets import CSet, cset_vector
from .errors import ConfigError, ContractError, DegenerateInputError, NumericsError
from .grid import (
    GridState,
    Hamiltonian,
    Region,
    check_universal,
    momentum_amplitudes,
    project,
    propagate,
)
from .prob import DEFAULT_EPS, TypicalityValue

DUAL_FORM_TOL = 1e-10
ZERO_DENOM = 1e-14


def quantum_chain_bound(m1: float) -> float:
    """Bound ``m1 / (1 - sqrt(m1))^2`` on the min-normalized variant; it is
    at most ``2 m1`` once ``m1 <= 0.08``."""
    root = math.sqrt(m1)
    if not root < 1.0:
        raise ConfigError(f"chain bound needs m1 < 1, got {m1}")
    return m1 / (1.0 - root) ** 2


def _variant_denominator(n1: float, n2: float, variant: str) -> float:
    if variant in ("N1", "sqrt"):
        return max(n1, n2)
    if variant == "N2":
        return 0.5 * (n1 + n2)
    if variant == "N3":
        return min(n1, n2)
    raise ConfigError(f"unknown normalization variant {variant!r}")


def mutual_from_states(a: GridState, b: GridState, variant: str = "N1") -> float:
    """Mutual typicality of two already-applied s-set states."""
    denom = _variant_denominator(a.norm_sq, b.norm_sq, variant)
    if denom < ZERO_DENOM:
        raise DegenerateInputError("mutual typicality: denominator is degenerate")
    value = (a - b).norm_sq / denom
    return math.sqrt(value) if variant == "sqrt" else value


def _difference_sq_second_route(s1: CSet, s2: CSet, psi0: GridState,
                                h: Hamiltonian, v1: GridState,
                                v2: GridState) -> float:
    """Recompute ``|S1 psi0 - S2 psi0|^2`` along an independent route."""
    if not s1.is_asymptotic and not s2.is_asymptotic:
        # evaluate in the t2 frame: |E(D2) psi(t2) - U(t2-t1) E(D1) psi(t1)|^2
        a2 = project(propagate(psi0, h, s2.time), s2.region)
        b2 = propagate(project(propagate(psi0, h, s1.time), s1.region),
                       h, s2.time - s1.time)
        return (a2 - b2).norm_sq
    # momentum-space Parseval route
    diff = momentum_amplitudes(v1) - momentum_amplitudes(v2)
    return float(np.sum(np.abs(diff) ** 2) * v1.grid.dk)


def quantum_mutual(s1: CSet, s2: CSet, psi0: GridState, h: Hamiltonian,
                   variant: str = "N1", eps: float = DEFAULT_EPS) -> TypicalityValue:
    """Mutual typicality of two s-sets (any mix of finite and asymptotic)."""
    check_universal(psi0)
    v1 = cset_vector(s1, psi0, h)
    v2 = cset_vector(s2, psi0, h)
    d = (v1 - v2).norm_sq
    d_alt = _difference_sq_second_route(s1, s2, psi0, h, v1, v2)
    if abs(d - d_alt) > DUAL_FORM_TOL:
        raise NumericsError(
            f"mutual typicality routes disagree: {d!r} vs {d_alt!r}")
    denom = _variant_denominator(v1.norm_sq, v2.norm_sq, variant)
    if denom < ZERO_DENOM:
        raise DegenerateInputError("mutual typicality: denominator is degenerate")
    value = d / denom
    if variant == "sqrt":
        value = math.sqrt(value)
    return TypicalityValue(value, variant, eps)


def quantum_absolute(s: CSet, psi0: GridState, h: Hamiltonian,
                     eps: float = DEFAULT_EPS) -> TypicalityValue:
    """``|S psi0 - psi0|^2``, equal to the Born weight of the complement."""
    check_universal(psi0)
    v = cset_vector(s, psi0, h)
    form1 = (v - psi0).norm_sq
    comp = CSet(s.time, s.region.complement())
    form2 = cset_vector(comp, psi0, h).norm_sq
    if abs(form1 - form2) > DUAL_FORM_TOL:
        raise NumericsError(
            f"absolute typicality routes disagree: {form1!r} vs {form2!r}")
    return TypicalityValue(form1, None, eps)


def quantum_relative_equal_time(s1: CSet, s2: CSet, psi0: GridState,
                                h: Hamiltonian,
                                eps: float = DEFAULT_EPS) -> TypicalityValue:
    """``|E(D2 \\ D1) psi(t)|^2 / |E(D2) psi(t)|^2`` for equal-time s-sets."""
    check_universal(psi0)
    if s1.time != s2.time:
        raise ContractError(
            "relative typicality in closed form needs equal times; "
            "use quantum_relative_general for unequal times")
    if s1.is_asymptotic:
        d2_minus_d1 = CSet.asymptotic(
            type(s2.region)(s2.region.grid, s2.region.mask & ~s1.region.mask,
                            s2.region.mass))
    else:
        d2_minus_d1 = CSet(s2.time, Region(s2.region.grid,
                                           s2.region.mask & ~s1.region.mask))
    denom = cset_vector(s2, psi0, h).norm_sq
    if denom < ZERO_DENOM:
        raise DegenerateInputError("relative typicality: |S2 psi0|^2 is degenerate")
    value = cset_vector(d2_minus_d1, psi0, h).norm_sq / denom
    return TypicalityValue(value, None, eps)


def optimal_region(s1: CSet, t2: float, psi0: GridState,
                   h: Hamiltonian) -> Region:
    """Region at time ``t2`` whose s-set state best approximates ``S1 psi0``.

    Cell by cell, a point belongs iff including it strictly lowers
    ``|S1 psi0 - (t2, Delta) psi0|``; ties are excluded, which changes
    nothing in the attained distance.
    """
    check_universal(psi0)
    if math.isinf(t2):
        raise ContractError("use optimal_velocity_region for time infinity")
    chi = propagate(cset_vector(s1, psi0, h), h, t2).amps
    psi2 = propagate(psi0, h, t2).amps
    mask = np.abs(psi2) ** 2 < 2.0 * np.real(np.conj(psi2) * chi)
    return Region(psi0.grid, mask)


def quantum_relative_general(s1: CSet, s2: CSet, psi0: GridState,
                             h: Hamiltonian,
                             eps: float = DEFAULT_EPS) -> TypicalityValue:
    """Relative typicality for arbitrary time pairs, via the optimal region.

    The value is the larger of m(S2 n (t2, best), S2) and
    m(S1, (t2, best)). A warning flag is set when ``|S2 psi0|`` is within a
    factor 3 of the attained approximation distance, where the construction
    loses its meaning.
    """
    check_universal(psi0)
    if s2.is_asymptotic:
        raise ContractError("quantum_relative_general needs a finite-time S2")
    t2 = s2.time
    best = optimal_region(s1, t2, psi0, h)
    s_best = CSet(t2, best)
    v1 = cset_vector(s1, psi0, h)
    v2 = cset_vector(s2, psi0, h)
    v_best = cset_vector(s_best, psi0, h)
    v_inter = cset_vector(CSet(t2, s2.region & best), psi0, h)

    denom_a = max(v_inter.norm_sq, v2.norm_sq)
    denom_b = max(v1.norm_sq, v_best.norm_sq)
    if denom_a < ZERO_DENOM or denom_b < ZERO_DENOM:
        raise DegenerateInputError("relative typicality: degenerate denominator")
    term_a = (v_inter - v2).norm_sq / denom_a
    term_b = (v1 - v_best).norm_sq / denom_b

    dist = math.sqrt((v1 - v_best).norm_sq)
    warning = math.sqrt(v2.norm_sq) <= 3.0 * dist
    return TypicalityValue(max(term_a, term_b), None, eps, warning=warning)


def quantum_typicality_measure(s1: CSet, s2: CSet, psi0: GridState,
                               h: Hamiltonian,
                               eps: float = DEFAULT_EPS) -> TypicalityValue:
    """``2 |Re <S1 psi0, S2 psi0>| / (|S1 psi0|^2 + |S2 psi0|^2)`` in [0, 1]."""
    check_universal(psi0)
    v1 = cset_vector(s1, psi0, h)
    v2 = cset_vector(s2, psi0, h)
    n1, n2 = v1.norm_sq, v2.norm_sq
    if n1 + n2 < ZERO_DENOM:
        raise DegenerateInputError("typicality measure: degenerate denominator")
    form1 = 2.0 * abs(v1.inner(v2).real) / (n1 + n2)
    form2 = abs(1.0 - (v1 - v2).norm_sq / (n1 + n2))
    if abs(form1 - form2) > DUAL_FORM_TOL:
        raise NumericsError(
            f"typicality measure routes disagree: {form1!r} vs {form2!r}")
    if form1 > 1.0 + 1e-12:
        raise NumericsError(f"typicality measure left [0, 1]: {form1!r}")
    return TypicalityValue(min(form1, 1.0), None, eps)


def born_alternative_mutual(s1: CSet, s2: CSet, psi0: GridState,
                            h: Hamiltonian,
                            eps: float = DEFAULT_EPS) -> TypicalityValue:
    """Sum of the two conditional leak terms, for comparison plots only.

    First term: weight that flows from ``D1`` at ``t1`` to outside ``D2``
    at ``t2``, conditioned on the ``D1`` weight; second term the same with
    the roles swapped.
    """
    check_universal(psi0)
    if s1.is_asymptotic or s2.is_asymptotic:
        raise ContractError("the Born-rule alternative needs finite times")

    def leak(sa: CSet, sb: CSet) -> float:
        packet = project(propagate(psi0, h, sa.time), sa.region)
        denom = packet.norm_sq
        if denom < ZERO_DENOM:
            raise DegenerateInputError(
                "Born alternative: conditioning weight is degenerate")
        moved = propagate(packet, h, sb.time - sa.time)
        outside = project(moved, sb.region.complement())
        return outside.norm_sq / denom

    return TypicalityValue(leak(s1, s2) + leak(s2, s1), None, eps)


@dataclass(frozen=True)
class QuantumTypicalityReport:
    """All typicality kinds for one s-set pair, for report emission."""

    values: dict[str, float]
    optimal_region_mask: np.ndarray | None
    warning: bool


def quantum_report(s1: CSet, s2: CSet, psi0: GridState, h: Hamiltonian,
                   eps: float = DEFAULT_EPS) -> QuantumTypicalityReport:
    values: dict[str, float] = {}
    for variant in ("N1", "N2", "N3", "sqrt"):
        values[f"mutual_{variant}"] = quantum_mutual(
            s1, s2, psi0, h, variant, eps).value
    values["measure"] = quantum_typicality_measure(s1, s2, psi0, h, eps).value
    values["absolute_s1"] = quantum_absolute(s1, psi0, h, eps).value
    values["absolute_s2"] = quantum_absolute(s2, psi0, h, eps).value
    region_mask = None
    warning = False
    if not s2.is_asymptotic:
        rel = quantum_relative_general(s1, s2, psi0, h, eps)
        values["relative_general"] = rel.value
        warning = rel.warning
        region_mask = optimal_region(s1, s2.time, psi0, h).mask
        values["born_alternative"] = born_alternative_mutual(
            s1, s2, psi0, h, eps).value
    return QuantumTypicalityReport(values, region_mask, warning)
