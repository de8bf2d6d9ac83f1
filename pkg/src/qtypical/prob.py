"""Typicality functions over finite weighted sample spaces.

All subsets are boolean masks over the element index set, mirroring the
grid-region representation, so the same checking code serves abstract
spaces and grids. Measures are normalized by the total weight, making the
space a probability space regardless of the raw weight scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateInputError
from .grid import ZERO_NORM

DEFAULT_EPS = 0.01   # typicality-regime threshold when none is configured


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """Finite set with nonnegative weights and positive total mass."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ConfigError("weights must be a nonempty 1D array")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ConfigError("weights must be finite and nonnegative")
        if w.sum() <= 0:
            raise ConfigError("total weight must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def measure(self, mask: np.ndarray) -> float:
        """Normalized measure of a subset."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.weights.shape:
            raise ConfigError("subset mask does not match the space")
        return float(self.weights[mask].sum()) / self.total

    def full(self) -> np.ndarray:
        return np.ones(self.size, dtype=bool)


@dataclass(frozen=True)
class TypicalityValue:
    """A typicality-function value with its regime flag."""

    value: float
    variant: str | None = None
    eps: float = DEFAULT_EPS
    regime: bool = field(init=False)
    warning: bool = False

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ConfigError(f"typicality values are nonnegative, got {self.value}")
        object.__setattr__(self, "regime", self.value <= self.eps)


def _guard(denom: float, what: str) -> float:
    if denom < ZERO_NORM:
        raise DegenerateInputError(f"{what}: denominator {denom!r} is degenerate")
    return denom


def mutual_typicality(space: FiniteMeasureSpace, a: np.ndarray, b: np.ndarray,
                      variant: str = "N1", eps: float = DEFAULT_EPS) -> TypicalityValue:
    """Symmetric-difference measure over a normalization of mu(A), mu(B)."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    num = space.measure(a ^ b)
    mu_a, mu_b = space.measure(a), space.measure(b)
    if variant == "N1":
        denom = max(mu_a, mu_b)
    elif variant == "N2":
        denom = 0.5 * (mu_a + mu_b)
    elif variant == "N3":
        denom = min(mu_a, mu_b)
    else:
        raise ConfigError(f"unknown normalization variant {variant!r}")
    return TypicalityValue(num / _guard(denom, "mutual typicality"), variant, eps)


def relative_typicality(space: FiniteMeasureSpace, a: np.ndarray, b: np.ndarray,
                        eps: float = DEFAULT_EPS) -> TypicalityValue:
    """``mu(B \\ A) / mu(B)``; small means A is typical relative to B."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    denom = _guard(space.measure(b), "relative typicality")
    return TypicalityValue(space.measure(b & ~a) / denom, None, eps)


def absolute_typicality(space: FiniteMeasureSpace, a: np.ndarray,
                        eps: float = DEFAULT_EPS) -> TypicalityValue:
    """Measure of the complement; small means A is typical in the space."""
    a = np.asarray(a, dtype=bool)
    return TypicalityValue(space.measure(~a), None, eps)


def typicality_measure(space: FiniteMeasureSpace, a: np.ndarray, b: np.ndarray,
                       eps: float = DEFAULT_EPS) -> TypicalityValue:
    """``2 mu(A n B) / (mu(A) + mu(B))``, a similarity in [0, 1]."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    denom = _guard(space.measure(a) + space.measure(b), "typicality measure")
    return TypicalityValue(2.0 * space.measure(a & b) / denom, None, eps)


def prob_typicality(kind: str, a: np.ndarray, b: np.ndarray | None,
                    space: FiniteMeasureSpace, variant: str = "N1",
                    eps: float = DEFAULT_EPS) -> TypicalityValue:
    """Dispatcher over the four probabilistic typicality kinds."""
    if kind == "mutual":
        if b is None:
            raise ConfigError("mutual typicality needs two subsets")
        return mutual_typicality(space, a, b, variant, eps)
    if kind == "relative":
        if b is None:
            raise ConfigError("relative typicality needs two subsets")
        return relative_typicality(space, a, b, eps)
    if kind == "absolute":
        return absolute_typicality(space, a, eps)
    if kind == "measure":
        if b is None:
            raise ConfigError("typicality measure needs two subsets")
        return typicality_measure(space, a, b, eps)
    raise ConfigError(f"unknown typicality kind {kind!r}")


def prob_chain_bound(m1: float) -> float:
    """Upper bound ``m1 / (1 - m1)`` on the min-normalized variant, valid
    for ``m1 < 1`` and at most ``2 m1`` once ``m1 <= 0.5``."""
    if not m1 < 1.0:
        raise ConfigError(f"chain bound needs m1 < 1, got {m1}")
    return m1 / (1.0 - m1)
