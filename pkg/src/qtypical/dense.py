"""Dense finite-dimensional instances used as an independent oracle.

Everything here works with explicit vectors and matrices (no FFTs, no
grid bookkeeping) so that values computed on grids can be cross-checked
against a second, structurally different pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateInputError
from .grid import Grid, GridState, Hamiltonian, _eigensystem

UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class DenseInstance:
    """Haar-random state with diagonal projectors and per-tag unitaries."""

    dim: int
    state: np.ndarray                # (dim,) complex, unit norm
    regions: np.ndarray              # (n_regions, dim) boolean masks
    unitaries: np.ndarray            # (n_times, dim, dim), U[i] evolves 0 -> tag i

    def __post_init__(self) -> None:
        eye = np.eye(self.dim)
        for u in self.unitaries:
            if np.linalg.norm(u.conj().T @ u - eye) > UNITARITY_TOL * self.dim:
                raise ConfigError("unitarity check failed for a dense instance")

    def sset_vector(self, time_tag: int, region_idx: int) -> np.ndarray:
        """``U(t)^dag E(Delta) U(t) psi`` for the tagged time and region."""
        u = self.unitaries[time_tag]
        mask = self.regions[region_idx]
        return u.conj().T @ (mask * (u @ self.state))

    def born_weights(self, time_tag: int) -> np.ndarray:
        return np.abs(self.unitaries[time_tag] @ self.state) ** 2


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_mask(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform over nonempty, non-full cell subsets (full allowed at dim 1)."""
    if dim < 2:
        return np.ones(1, dtype=bool)
    while True:
        mask = rng.random(dim) < 0.5
        ones = int(mask.sum())
        if 0 < ones < dim:
            return mask


def oracle_random_instance(dim: int, n_regions: int, n_times: int,
                           seed: int) -> DenseInstance:
    """Deterministic random instance: Haar state, uniform nonempty masks,
    Haar unitaries, all drawn from ``seed``."""
    if not (2 <= dim <= 64):
        raise ConfigError(f"dense oracle supports 2 <= dim <= 64, got {dim}")
    if n_regions < 1 or n_times < 1:
        raise ConfigError("need at least one region and one time tag")
    rng = np.random.default_rng(seed)
    state = haar_state(dim, rng)
    regions = np.stack([random_mask(dim, rng) for _ in range(n_regions)])
    unitaries = np.stack([haar_unitary(dim, rng) for _ in range(n_times)])
    return DenseInstance(dim=dim, state=state, regions=regions, unitaries=unitaries)


# -- dense-side typicality formulas (kept deliberately separate from the
#    grid implementations so the two routes stay independent) --------------

def _norm_sq(v: np.ndarray) -> float:
    return float(np.sum(np.abs(v) ** 2))


def dense_mutual(v1: np.ndarray, v2: np.ndarray, variant: str = "N1") -> float:
    d = _norm_sq(v1 - v2)
    n1, n2 = _norm_sq(v1), _norm_sq(v2)
    if variant == "N1":
        denom = max(n1, n2)
    elif variant == "N2":
        denom = 0.5 * (n1 + n2)
    elif variant == "N3":
        denom = min(n1, n2)
    elif variant == "sqrt":
        denom = max(n1, n2)
        if denom < 1e-14:
            raise DegenerateInputError("dense mutual typicality: zero denominator")
        return float(np.sqrt(d / denom))
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    if denom < 1e-14:
        raise DegenerateInputError("dense mutual typicality: zero denominator")
    return d / denom


def dense_absolute(v: np.ndarray, psi: np.ndarray) -> float:
    return _norm_sq(v - psi)


def dense_relative_equal_time(inst: DenseInstance, time_tag: int,
                              mask1: np.ndarray, mask2: np.ndarray) -> float:
    """``|E(D2 \\ D1) psi(t)|^2 / |E(D2) psi(t)|^2`` on a dense instance."""
    w = inst.born_weights(time_tag)
    denom = float(w[mask2].sum())
    if denom < 1e-14:
        raise DegenerateInputError("dense relative typicality: zero denominator")
    return float(w[mask2 & ~mask1].sum()) / denom


def dense_typicality_measure(v1: np.ndarray, v2: np.ndarray) -> float:
    n1, n2 = _norm_sq(v1), _norm_sq(v2)
    if n1 + n2 < 1e-14:
        raise DegenerateInputError("dense typicality measure: zero denominator")
    return 2.0 * abs(float(np.real(np.vdot(v1, v2)))) / (n1 + n2)


def dense_overlap(v1: np.ndarray, v2: np.ndarray) -> float:
    """Pointwise-minimum overlap of two dense vectors."""
    n1, n2 = _norm_sq(v1), _norm_sq(v2)
    if min(n1, n2) < 1e-14:
        raise DegenerateInputError("dense overlap: zero denominator")
    return float(np.minimum(np.abs(v1) ** 2, np.abs(v2) ** 2).sum()) / min(n1, n2)


def dense_chain_weight(step_unitaries: list[np.ndarray],
                       masks: list[np.ndarray],
                       psi: np.ndarray) -> float:
    """``|E(D_n) U_n ... E(D_1) U_1 psi|^2`` for a projected evolution chain."""
    if len(step_unitaries) != len(masks):
        raise ConfigError("need one unitary step per projection slot")
    v = psi
    for u, mask in zip(step_unitaries, masks):
        v = mask * (u @ v)
    return _norm_sq(v)


def embed_grid_instance(psi0: GridState, h: Hamiltonian,
                        regions: list[np.ndarray],
                        times: list[float]) -> DenseInstance:
    """Embed a small grid system as a dense instance (for cross-checks).

    The state is scaled by ``sqrt(dx)`` so that plain vector norms match
    the grid's integral norms; unitaries are materialized as matrices.
    """
    grid: Grid = psi0.grid
    state = psi0.amps * np.sqrt(grid.dx)
    if h.is_free:
        f = np.fft.fft(np.eye(grid.n), axis=0)
        finv = np.fft.ifft(np.eye(grid.n), axis=0)
        kin_phase = grid.k ** 2 / (2.0 * h.mass)
        unit = [finv @ (np.exp(-1j * kin_phase * t)[:, None] * f) for t in times]
    else:
        energies, vectors = _eigensystem(h, grid)
        unit = [vectors @ (np.exp(-1j * energies * t)[:, None] * vectors.conj().T)
                for t in times]
    return DenseInstance(dim=grid.n, state=state,
                         regions=np.stack([np.asarray(r, dtype=bool) for r in regions]),
                         unitaries=np.stack(unit))
