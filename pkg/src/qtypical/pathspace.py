"""Desk-scale path ensembles and path-measure diagnostics.

Four concrete path measures are realized here: classical Hamiltonian flow
with the phase-space volume measure, Bohmian trajectories carrying the
Born distribution, the memoryless product measure over single-time Born
weights, and the projected-chain weight whose failure of additivity is
demonstrated rather than repaired.

Ensembles carry explicit path weights, so the occupation and memory bounds
can be verified exactly (no sampling noise), while classical and Bohmian
ensembles are Monte Carlo realizations checked at binomial tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    ContractError,
    DegenerateInputError,
    NodeError,
)
from .grid import (
    Grid,
    GridState,
    Hamiltonian,
    Region,
    check_universal,
    project,
    propagate,
)


# --------------------------------------------------------------------------
# ensembles and the regions they can be queried with

@dataclass(frozen=True)
class Interval:
    """Half-open 1D interval ``[lo, hi)``."""

    lo: float
    hi: float

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x < self.hi)


@dataclass(frozen=True)
class PhaseSpaceBox:
    """Axis-aligned box in (position, momentum) phase space."""

    x_lo: float
    x_hi: float
    p_lo: float
    p_hi: float

    @property
    def volume(self) -> float:
        return max(self.x_hi - self.x_lo, 0.0) * max(self.p_hi - self.p_lo, 0.0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        x, p = points[..., 0], points[..., 1]
        return ((x >= self.x_lo) & (x < self.x_hi)
                & (p >= self.p_lo) & (p < self.p_hi))


@dataclass(frozen=True)
class PathEnsemble:
    """Weighted collection of discrete-time paths on a shared time grid."""

    times: np.ndarray        # (T,), strictly increasing
    positions: np.ndarray    # (P, T) or (P, T, D); stored as (P, T, D)
    weights: np.ndarray      # (P,), nonnegative, sums to one

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 2:
            pos = pos[:, :, None]
        w = np.asarray(self.weights, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise ConfigError("times must be strictly increasing")
        if pos.shape[1] != times.size or pos.shape[0] != w.size:
            raise ConfigError("positions, weights and times have mismatched shapes")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("weights must be nonnegative and sum to one")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @property
    def n_paths(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[2]

    def member_mask(self, time_index: int, region) -> np.ndarray:
        """Boolean path mask: which paths sit inside the region at the time."""
        pts = self.positions[:, time_index, :]
        if self.dim == 1:
            return np.asarray(region.contains(pts[:, 0]), dtype=bool)
        return np.asarray(region.contains(pts), dtype=bool)

    def mask_weight(self, mask: np.ndarray) -> float:
        return float(self.weights[np.asarray(mask, dtype=bool)].sum())


@dataclass(frozen=True)
class CylinderQuery:
    """Finite list of (time, region) constraints with distinct times."""

    factors: tuple

    def __post_init__(self) -> None:
        times = [t for t, _ in self.factors]
        if len(times) == 0:
            raise ConfigError("a cylinder query needs at least one factor")
        if any((not np.isfinite(t)) or t < 0 for t in times):
            raise ConfigError("cylinder-query times must be finite and >= 0")
        if len(set(times)) != len(times):
            raise ConfigError("cylinder-query times must be distinct")


# --------------------------------------------------------------------------
# classical flow ensembles

@dataclass(frozen=True)
class ClassicalSystem:
    """Classical 1D Hamiltonian flow: free drift or harmonic rotation."""

    kind: str = "harmonic"
    mass: float = 1.0
    omega: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("harmonic", "free"):
            raise ConfigError(f"unknown classical system kind {self.kind!r}")
        if self.mass <= 0 or self.omega <= 0:
            raise ConfigError("mass and omega must be positive")

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def flow(self, points: np.ndarray, t: float) -> np.ndarray:
        """Advance phase-space points by time ``t`` (exact flow map)."""
        x, p = points[..., 0], points[..., 1]
        if self.kind == "free":
            return np.stack([x + p / self.mass * t, p], axis=-1)
        c, s = np.cos(self.omega * t), np.sin(self.omega * t)
        mw = self.mass * self.omega
        return np.stack([x * c + (p / mw) * s, p * c - mw * x * s], axis=-1)


def classical_ensemble(system: ClassicalSystem, init_region: PhaseSpaceBox,
                       n_paths: int, times: np.ndarray,
                       seed: int) -> PathEnsemble:
    """Uniform phase-space samples of ``init_region`` moved by the flow."""
    if init_region.volume <= 0:
        raise ConfigError("initial phase-space region has zero volume")
    if n_paths < 1:
        raise ConfigError("need at least one path")
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(init_region.x_lo, init_region.x_hi, size=n_paths)
    p0 = rng.uniform(init_region.p_lo, init_region.p_hi, size=n_paths)
    start = np.stack([x0, p0], axis=-1)
    pos = np.stack([system.flow(start, t) for t in times], axis=1)
    weights = np.full(n_paths, 1.0 / n_paths)
    return PathEnsemble(times, pos, weights)


# --------------------------------------------------------------------------
# Bohmian trajectories

NODE_FLOOR = 1e-6     # |psi| below this fraction of the peak counts as a node


class _WaveEvaluator:
    """Evaluate psi(t) and its guidance velocity field cheaply for many t."""

    def __init__(self, psi0: GridState, h: Hamiltonian):
        self.grid = psi0.grid
        self.h = h
        self.psi0 = psi0
        self._cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def field(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Velocity samples and node mask on the grid at time ``t``."""
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        amps = propagate(self.psi0, self.h, t).amps if t != 0.0 else self.psi0.amps
        v, nodes = _velocity_field(amps, self.grid, self.h.mass)
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[t] = (v, nodes)
        return v, nodes


def _velocity_field(amps: np.ndarray, grid: Grid,
                    mass: float) -> tuple[np.ndarray, np.ndarray]:
    deriv = np.fft.ifft(1j * grid.k * np.fft.fft(amps))
    mag = np.abs(amps)
    nodes = mag < NODE_FLOOR * mag.max()
    v = np.zeros(grid.n)
    ok = ~nodes
    v[ok] = np.imag(deriv[ok] / amps[ok]) / mass
    return v, nodes


def _interp_velocity(x: np.ndarray, grid: Grid, v: np.ndarray,
                     nodes: np.ndarray) -> np.ndarray:
    """Linear interpolation of the velocity field with periodic wrap.

    Raises NodeError if any query point sits in a node-flagged cell pair.
    """
    xw = (np.asarray(x, dtype=float) - grid.x_min) % grid.length
    pos = xw / grid.dx
    left = np.floor(pos).astype(int) % grid.n
    right = (left + 1) % grid.n
    if np.any(nodes[left] | nodes[right]):
        raise NodeError("velocity query inside a node region")
    frac = pos - np.floor(pos)
    return v[left] * (1.0 - frac) + v[right] * frac


def bohmian_velocity(psi: GridState, x: np.ndarray | float,
                     mass: float = 1.0) -> np.ndarray | float:
    """Guidance velocity ``Im(psi'/psi)/m`` interpolated to positions."""
    v, nodes = _velocity_field(psi.amps, psi.grid, mass)
    out = _interp_velocity(np.atleast_1d(x), psi.grid, v, nodes)
    return float(out[0]) if np.isscalar(x) else out


def _rk4_steps(x: np.ndarray, t0: float, dt: float, waves: _WaveEvaluator,
               depth: int, max_depth: int) -> np.ndarray:
    """One RK4 step, recursively halved when a node region is touched."""
    grid = waves.grid
    try:
        v1, n1 = waves.field(t0)
        k1 = _interp_velocity(x, grid, v1, n1)
        v2, n2 = waves.field(t0 + dt / 2)
        k2 = _interp_velocity(x + dt / 2 * k1, grid, v2, n2)
        k3 = _interp_velocity(x + dt / 2 * k2, grid, v2, n2)
        v4, n4 = waves.field(t0 + dt)
        k4 = _interp_velocity(x + dt * k3, grid, v4, n4)
        return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    except NodeError:
        if depth >= max_depth:
            raise NodeError(
                f"node region unavoidable at t = {t0!r} even at the minimum step")
        half = dt / 2
        mid = _rk4_steps(x, t0, half, waves, depth + 1, max_depth)
        return _rk4_steps(mid, t0 + half, half, waves, depth + 1, max_depth)


def sample_born_positions(psi0: GridState, n_paths: int,
                          rng: np.random.Generator,
                          init_region: Region | None = None) -> np.ndarray:
    """Draw positions from the Born density (optionally restricted)."""
    grid = psi0.grid
    dens = np.abs(psi0.amps) ** 2 * grid.dx
    if init_region is not None:
        dens = np.where(init_region.mask, dens, 0.0)
    total = dens.sum()
    if total < 1e-14:
        raise DegenerateInputError("sampling region carries no Born weight")
    cells = rng.choice(grid.n, size=n_paths, p=dens / total)
    return grid.x[cells] + (rng.random(n_paths) - 0.5) * grid.dx


def bohmian_ensemble(psi0: GridState, h: Hamiltonian, n_paths: int,
                     times: np.ndarray, seed: int,
                     init_region: Region | None = None,
                     dt: float = 0.005,
                     max_halvings: int = 14) -> PathEnsemble:
    """Integrate guidance trajectories seeded from the Born distribution.

    Fixed-step RK4 with node-guarded velocity evaluation; steps are halved
    (up to ``max_halvings`` times) when a trajectory approaches a node.
    """
    check_universal(psi0)
    times = np.asarray(times, dtype=float)
    if times[0] < 0:
        raise ConfigError("trajectory times must be >= 0")
    rng = np.random.default_rng(seed)
    x = sample_born_positions(psi0, n_paths, rng, init_region)
    waves = _WaveEvaluator(psi0, h)

    out = np.empty((n_paths, times.size))
    t = 0.0
    for j, t_target in enumerate(times):
        while t < t_target - 1e-12:
            step = min(dt, t_target - t)
            x = _rk4_steps(x, t, step, waves, 0, max_halvings)
            t += step
        out[:, j] = x
    weights = np.full(n_paths, 1.0 / n_paths)
    return PathEnsemble(times, out, weights)


def equivariance_check(ensemble: PathEnsemble, psi0: GridState,
                       h: Hamiltonian, region: Region, time_index: int,
                       tol: float = 1e-2) -> dict:
    """Compare the ensemble fraction in a region with the Born weight.

    The allowance is three binomial standard deviations plus an integrator
    tolerance. Only meaningful for full-support Born-seeded ensembles.
    """
    frac = ensemble.mask_weight(ensemble.member_mask(time_index, region))
    evolved = propagate(psi0, h, float(ensemble.times[time_index]))
    born = project(evolved, region).norm_sq
    sigma = math.sqrt(max(born * (1.0 - born), 0.0) / ensemble.n_paths)
    allowance = 3.0 * sigma + tol
    return {
        "fraction": frac,
        "born": born,
        "allowance": allowance,
        "ok": bool(abs(frac - born) <= allowance),
    }


# --------------------------------------------------------------------------
# product and projected-chain measures on the quantum side

def everett_bell_fdd(query: CylinderQuery, psi0: GridState,
                     h: Hamiltonian) -> float:
    """Product of single-time Born weights over the query factors."""
    check_universal(psi0)
    value = 1.0
    for t, region in query.factors:
        value *= project(propagate(psi0, h, t), region).norm_sq
    return value


def mu_q_fdd(query: CylinderQuery, psi0: GridState, h: Hamiltonian) -> float:
    """Projected-chain weight of a time-ordered query.

    This is the reduction-postulate weight; it is not additive in the
    region slots, which is what :func:`additivity_gap` measures.
    """
    check_universal(psi0)
    times = [t for t, _ in query.factors]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ContractError("projected-chain weight needs nondecreasing times")
    state = psi0
    t_prev = 0.0
    for t, region in query.factors:
        state = project(propagate(state, h, t - t_prev), region)
        t_prev = t
    return state.norm_sq


def additivity_gap(query: CylinderQuery, slot: int, part_a: Region,
                   part_b: Region, psi0: GridState, h: Hamiltonian) -> float:
    """``mu_Q`` of the union slot minus the sum over its two disjoint parts."""
    factors = list(query.factors)
    t_i, region_i = factors[slot]
    if (part_a.mask & part_b.mask).any():
        raise ContractError("slot parts must be disjoint")
    if not np.array_equal(part_a.mask | part_b.mask, region_i.mask):
        raise ContractError("slot parts must union to the original region")
    whole = mu_q_fdd(query, psi0, h)
    with_a = list(factors)
    with_a[slot] = (t_i, part_a)
    with_b = list(factors)
    with_b[slot] = (t_i, part_b)
    part_sum = (mu_q_fdd(CylinderQuery(tuple(with_a)), psi0, h)
                + mu_q_fdd(CylinderQuery(tuple(with_b)), psi0, h))
    return whole - part_sum


# --------------------------------------------------------------------------
# ensemble diagnostics

@dataclass(frozen=True)
class OccupationReport:
    """Indicator statistics for time spent inside a reference region."""

    per_time_means: np.ndarray
    pooled_mean: float
    pooled_variance: float


def occupation_report(ensemble: PathEnsemble, region,
                      time_indices: np.ndarray | None = None) -> OccupationReport:
    """Weighted statistics of the fraction of sampled times spent inside."""
    if time_indices is None:
        time_indices = np.arange(ensemble.times.size)
    indicators = np.stack(
        [ensemble.member_mask(int(i), region).astype(float) for i in time_indices],
        axis=1)
    y = indicators.mean(axis=1)
    w = ensemble.weights
    mean = float(w @ y)
    var = float(w @ (y - mean) ** 2)
    per_time = indicators.T @ w
    return OccupationReport(per_time, mean, var)


def memory_report(ensemble: PathEnsemble, earlier: tuple, later: tuple) -> float:
    """Relative typicality of the earlier s-set given the later one.

    Arguments are ``(time_index, region)`` pairs; small values mean the
    later knowledge almost surely came from the earlier set.
    """
    i1, r1 = earlier
    i2, r2 = later
    mask1 = ensemble.member_mask(int(i1), r1)
    mask2 = ensemble.member_mask(int(i2), r2)
    denom = ensemble.mask_weight(mask2)
    if denom < 1e-14:
        raise DegenerateInputError("memory condition: conditioning set has no weight")
    return ensemble.mask_weight(mask2 & ~mask1) / denom


def determinism_probe(ensemble: PathEnsemble, s_set: tuple,
                      target_index: int) -> float:
    """Weight of the symmetric difference between an s-set and the s-set
    built from the exact forward image of its member paths."""
    i1, r1 = s_set
    mask1 = ensemble.member_mask(int(i1), r1)
    targets = ensemble.positions[:, int(target_index), :]
    image = targets[mask1]
    if image.size == 0:
        return float(ensemble.mask_weight(mask1))
    hits = (targets[:, None, :] == image[None, :, :]).all(axis=2).any(axis=1)
    return ensemble.mask_weight(mask1 ^ hits)


@dataclass(frozen=True)
class BranchWindowReport:
    """Pairwise memory-condition values for a time-indexed region family."""

    max_value: float
    passed: bool
    witnesses: list


def branch_window_report(ensemble: PathEnsemble, region_map: list, eps: float,
                         window: float = math.inf) -> BranchWindowReport:
    """Check the memory condition over all ordered pairs within the window."""
    if len(region_map) != ensemble.times.size:
        raise ConfigError("need one region per ensemble time")
    times = ensemble.times
    worst = 0.0
    witnesses = []
    for i in range(times.size):
        for j in range(i, times.size):
            if times[j] - times[i] > window:
                break
            r = memory_report(ensemble, (i, region_map[i]), (j, region_map[j]))
            if r > worst:
                worst = r
            if r > eps:
                witnesses.append((float(times[i]), float(times[j]), float(r)))
    return BranchWindowReport(worst, worst <= eps, witnesses)


def ensemble_diagnostics(ensemble: PathEnsemble, kind: str, **kwargs):
    """Dispatcher over the diagnostic kinds (occupation, memory,
    determinism, branch)."""
    if kind == "occupation":
        return occupation_report(ensemble, **kwargs)
    if kind == "memory":
        return memory_report(ensemble, **kwargs)
    if kind == "determinism":
        return determinism_probe(ensemble, **kwargs)
    if kind == "branch":
        return branch_window_report(ensemble, **kwargs)
    raise ConfigError(f"unknown diagnostic kind {kind!r}")
