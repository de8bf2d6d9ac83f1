"""States, regions and propagation on a uniform periodic 1D grid.

Conventions used throughout the package:

* natural units, hbar = 1; the default mass is 1,
* the grid has ``n`` cells (a power of two), cell centers
  ``x_j = x_min + j dx``, and periodic boundary conditions,
* momenta live on the conjugate FFT grid ``k = 2 pi fftfreq(n, dx)``
  (stored in FFT order everywhere),
* a Gaussian packet with width parameter ``sigma`` has amplitude profile
  ``exp(-(x - c)^2 / (2 sigma^2))``, so the evolved width obeys
  ``sigma(t) = sigma sqrt(1 + t^2 / (m^2 sigma^4))`` under free motion.

Propagation is spectrally exact: free evolution applies the kinetic phase
in momentum space, and Hamiltonians with a potential are diagonalized once
(the factorization is cached per grid) so that ``U(t)`` is evaluated
without time stepping. This keeps round trips ``U(-t) U(t)`` and
compositions ``U(a) U(b) = U(a + b)`` at rounding-error accuracy, which the
typicality functionals rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError, NumericsError

NORM_TOL = 1e-9          # slack when checking "normalized" preconditions
ZERO_NORM = 1e-14        # denominators below this are degenerate


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid geometry."""

    n: int
    x_min: float
    dx: float

    def __post_init__(self) -> None:
        if not _is_power_of_two(self.n):
            raise ConfigError(f"grid size must be a power of two >= 2, got {self.n}")
        if not (self.dx > 0 and np.isfinite(self.dx)):
            raise ConfigError(f"dx must be positive and finite, got {self.dx}")

    @classmethod
    def centered(cls, n: int, length: float) -> "Grid":
        """Grid of ``n`` cells covering ``[-length/2, length/2)``."""
        return cls(n=n, x_min=-length / 2.0, dx=length / n)

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    def cell_of(self, x: np.ndarray | float) -> np.ndarray:
        """Indices of the cells containing the (periodically wrapped) points."""
        idx = np.floor((np.asarray(x, dtype=float) - self.x_min) / self.dx + 0.5)
        return (idx.astype(int)) % self.n


@dataclass(frozen=True)
class GridState:
    """Complex amplitude field on a grid; the stand-in for a wave function."""

    grid: Grid
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.grid.n,):
            raise ConfigError(
                f"amplitude array has shape {amps.shape}, expected ({self.grid.n},)")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise NumericsError("non-finite amplitudes")
        object.__setattr__(self, "amps", amps)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.dx)

    def inner(self, other: "GridState") -> complex:
        self._check_compatible(other)
        return complex(np.vdot(self.amps, other.amps) * self.grid.dx)

    def normalized(self) -> "GridState":
        nrm = np.sqrt(self.norm_sq)
        if nrm < np.sqrt(ZERO_NORM):
            raise ContractError("cannot normalize a (near-)zero state")
        return GridState(self.grid, self.amps / nrm)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def _check_compatible(self, other: "GridState | Region") -> None:
        if other.grid != self.grid:
            raise ContractError("grid geometries do not match")

    def __add__(self, other: "GridState") -> "GridState":
        self._check_compatible(other)
        return GridState(self.grid, self.amps + other.amps)

    def __sub__(self, other: "GridState") -> "GridState":
        self._check_compatible(other)
        return GridState(self.grid, self.amps - other.amps)

    def __mul__(self, c: complex) -> "GridState":
        return GridState(self.grid, self.amps * c)

    __rmul__ = __mul__


def check_universal(psi0: GridState) -> None:
    """Raise unless ``psi0`` is normalized (used for precondition checks)."""
    if not psi0.is_normalized():
        raise ContractError(
            f"state must be normalized, got |psi|^2 = {psi0.norm_sq!r}")


def distance_sq(a: GridState, b: GridState) -> float:
    return (a - b).norm_sq


@dataclass(frozen=True)
class Region:
    """Measurable spatial subset, represented as a union of grid cells."""

    grid: Grid
    mask: np.ndarray

    def __post_init__(self) -> None:
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.grid.n,):
            raise ConfigError(
                f"region mask has shape {mask.shape}, expected ({self.grid.n},)")
        object.__setattr__(self, "mask", mask)

    @classmethod
    def full(cls, grid: Grid) -> "Region":
        return cls(grid, np.ones(grid.n, dtype=bool))

    @classmethod
    def empty(cls, grid: Grid) -> "Region":
        return cls(grid, np.zeros(grid.n, dtype=bool))

    @classmethod
    def from_interval(cls, grid: Grid, lo: float, hi: float) -> "Region":
        """Cells whose centers fall in the half-open interval ``[lo, hi)``."""
        x = grid.x
        return cls(grid, (x >= lo) & (x < hi))

    @classmethod
    def left_of(cls, grid: Grid, cut: float = 0.0) -> "Region":
        return cls(grid, grid.x < cut)

    @classmethod
    def right_of(cls, grid: Grid, cut: float = 0.0) -> "Region":
        return cls(grid, grid.x >= cut)

    @property
    def lebesgue(self) -> float:
        return float(np.count_nonzero(self.mask)) * self.grid.dx

    @property
    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    def complement(self) -> "Region":
        return Region(self.grid, ~self.mask)

    def _binop(self, other: "Region", op) -> "Region":
        if other.grid != self.grid:
            raise ContractError("regions live on different grids")
        return Region(self.grid, op(self.mask, other.mask))

    def __and__(self, other: "Region") -> "Region":
        return self._binop(other, np.logical_and)

    def __or__(self, other: "Region") -> "Region":
        return self._binop(other, np.logical_or)

    def __xor__(self, other: "Region") -> "Region":
        return self._binop(other, np.logical_xor)

    def contains(self, x: np.ndarray | float) -> np.ndarray:
        """Membership test for (wrapped) positions, per grid cell."""
        return self.mask[self.grid.cell_of(x)]


@dataclass(frozen=True)
class VelocityRegion:
    """Measurable velocity subset, as a union of momentum-grid cells.

    Velocities are ``v = k / mass``; the mask is stored in FFT order to
    match momentum representations of states.
    """

    grid: Grid
    mask: np.ndarray
    mass: float = 1.0

    def __post_init__(self) -> None:
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.grid.n,):
            raise ConfigError(
                f"velocity mask has shape {mask.shape}, expected ({self.grid.n},)")
        if not self.mass > 0:
            raise ConfigError("mass must be positive")
        object.__setattr__(self, "mask", mask)

    @classmethod
    def full(cls, grid: Grid, mass: float = 1.0) -> "VelocityRegion":
        return cls(grid, np.ones(grid.n, dtype=bool), mass)

    @classmethod
    def empty(cls, grid: Grid, mass: float = 1.0) -> "VelocityRegion":
        return cls(grid, np.zeros(grid.n, dtype=bool), mass)

    @classmethod
    def from_interval(cls, grid: Grid, v_lo: float, v_hi: float,
                      mass: float = 1.0) -> "VelocityRegion":
        v = grid.k / mass
        return cls(grid, (v >= v_lo) & (v < v_hi), mass)

    @classmethod
    def positive(cls, grid: Grid, mass: float = 1.0) -> "VelocityRegion":
        return cls(grid, grid.k / mass > 0.0, mass)

    @property
    def velocities(self) -> np.ndarray:
        return self.grid.k / self.mass

    @property
    def dv(self) -> float:
        return self.grid.dk / self.mass

    def complement(self) -> "VelocityRegion":
        return VelocityRegion(self.grid, ~self.mask, self.mass)

    def contains_velocity(self, v: np.ndarray | float) -> np.ndarray:
        """Membership in the union of half-open cells around each center.

        Velocities beyond the representable range clip to the edge cells,
        so the full mask covers all of velocity space and complementary
        masks partition it exactly.
        """
        v = np.asarray(v, dtype=float)
        half = self.grid.n // 2
        idx = np.clip(np.round(v / self.dv), -half, half - 1).astype(int)
        return self.mask[idx % self.grid.n]


@dataclass(frozen=True)
class Hamiltonian:
    """Time-independent Hamiltonian ``p^2/(2m) + V(x)`` with hbar = 1."""

    kind: str = "free"            # "free" | "harmonic" | "tabulated"
    mass: float = 1.0
    omega: float = 1.0            # harmonic frequency
    potential: np.ndarray | None = None   # tabulated V on the grid cells

    def __post_init__(self) -> None:
        if self.kind not in ("free", "harmonic", "tabulated"):
            raise ConfigError(f"unknown Hamiltonian kind {self.kind!r}")
        if not self.mass > 0:
            raise ConfigError("mass must be positive")
        if self.kind == "tabulated":
            if self.potential is None:
                raise ConfigError("tabulated Hamiltonian needs a potential")
            object.__setattr__(
                self, "potential", np.asarray(self.potential, dtype=float))

    @property
    def is_free(self) -> bool:
        return self.kind == "free"

    def potential_on(self, grid: Grid) -> np.ndarray:
        if self.kind == "free":
            return np.zeros(grid.n)
        if self.kind == "harmonic":
            return 0.5 * self.mass * self.omega ** 2 * grid.x ** 2
        if self.potential.shape != (grid.n,):
            raise ConfigError(
                f"potential table has length {self.potential.shape[0]}, "
                f"grid has {grid.n} cells")
        return self.potential

    def _cache_key(self, grid: Grid) -> tuple:
        pot = self.potential.tobytes() if self.kind == "tabulated" else None
        return (self.kind, self.mass, self.omega, pot, grid.n, grid.x_min, grid.dx)


_EIG_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _eigensystem(h: Hamiltonian, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the grid Hamiltonian (cached)."""
    key = h._cache_key(grid)
    hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit
    kinetic_diag = grid.k ** 2 / (2.0 * h.mass)
    # kinetic operator column by column through the FFT, then add V
    ident = np.eye(grid.n, dtype=np.complex128)
    kin = np.fft.ifft(np.fft.fft(ident, axis=0) * kinetic_diag[:, None], axis=0)
    ham = kin + np.diag(h.potential_on(grid)).astype(np.complex128)
    ham = 0.5 * (ham + ham.conj().T)
    energies, vectors = np.linalg.eigh(ham)
    _EIG_CACHE[key] = (energies, vectors)
    return energies, vectors


def propagate(state: GridState, h: Hamiltonian, t: float) -> GridState:
    """Apply ``U(t) = exp(-i H t)``; ``t`` may be negative (then it is
    the adjoint of the forward propagator)."""
    if t == 0.0:
        return state
    if h.is_free:
        phases = np.exp(-1j * state.grid.k ** 2 / (2.0 * h.mass) * t)
        amps = np.fft.ifft(phases * np.fft.fft(state.amps))
    else:
        energies, vectors = _eigensystem(h, state.grid)
        coeff = vectors.conj().T @ state.amps
        amps = vectors @ (np.exp(-1j * energies * t) * coeff)
    if not np.all(np.isfinite(amps.view(np.float64))):
        raise NumericsError("propagation produced non-finite amplitudes")
    return GridState(state.grid, amps)


def evolve(state: GridState, h: Hamiltonian, t: float) -> GridState:
    """Forward evolution ``U(t) psi`` for ``t >= 0``."""
    if t < 0:
        raise ContractError(f"evolve expects t >= 0, got {t}")
    return propagate(state, h, t)


def project(state: GridState, region: Region) -> GridState:
    """Spatial projection ``E(region) psi`` (zero outside the region)."""
    state._check_compatible(region)
    return GridState(state.grid, np.where(region.mask, state.amps, 0.0))


def momentum_project(state: GridState, vregion: VelocityRegion) -> GridState:
    """Momentum-space projection onto ``{k : k/m in vregion}``."""
    if vregion.grid != state.grid:
        raise ContractError("grid geometries do not match")
    tilde = np.fft.fft(state.amps)
    return GridState(state.grid, np.fft.ifft(np.where(vregion.mask, tilde, 0.0)))


def momentum_amplitudes(state: GridState) -> np.ndarray:
    """Momentum representation in FFT order, normalized so that
    ``sum |amps_k|^2 dk`` equals the position-space norm."""
    return np.fft.fft(state.amps) * state.grid.dx / np.sqrt(2.0 * np.pi)


def make_gaussian_packet(grid: Grid, center: float, mean_momentum: float,
                         sigma: float) -> GridState:
    """Normalized Gaussian packet ``exp(-(x-c)^2/(2 sigma^2) + i p (x-c))``.

    Raises ``ConfigError`` when the grid cannot hold the packet: either the
    cell size is too coarse (``sigma < 4 dx``) or the tails lose more than
    1e-8 of the analytic unit mass to the domain boundary.
    """
    if sigma < 4.0 * grid.dx:
        raise ConfigError(
            f"packet width {sigma} under-resolved: need sigma >= 4 dx = {4 * grid.dx}")
    k_nyquist = np.pi / grid.dx
    if abs(mean_momentum) + 5.0 / sigma > k_nyquist:
        raise ConfigError(
            f"mean momentum {mean_momentum} too close to the Nyquist momentum "
            f"{k_nyquist:g} for width {sigma}")
    x = grid.x
    if not (x[0] <= center <= x[-1]):
        raise ConfigError(f"packet center {center} outside the grid domain")
    delta = x - center
    amps = (np.pi * sigma ** 2) ** (-0.25) * np.exp(
        -delta ** 2 / (2.0 * sigma ** 2) + 1j * mean_momentum * delta)
    captured = float(np.sum(np.abs(amps) ** 2) * grid.dx)
    if abs(captured - 1.0) > 1e-8:
        raise ConfigError(
            f"grid holds only {captured!r} of the packet mass; enlarge the domain")
    return GridState(grid, amps / np.sqrt(captured))
