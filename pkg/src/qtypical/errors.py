"""Exception types shared across the package."""


class TypicalityError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(TypicalityError):
    """A functional was asked to divide by a (near-)zero weight or norm."""


class ContractError(TypicalityError):
    """A documented precondition was violated by the caller."""


class UnsupportedDynamicsError(TypicalityError):
    """The requested operation needs dynamics this build does not model
    exactly (e.g. asymptotic projectors for a non-free Hamiltonian)."""


class NodeError(TypicalityError):
    """A guidance-velocity evaluation landed too close to a wave-function
    node, where the velocity field is singular."""


class ConfigError(TypicalityError):
    """A scenario or suite configuration failed validation."""


class NumericsError(TypicalityError):
    """An internal numerical consistency check failed (non-finite
    amplitudes, disagreeing dual formulas, ...)."""
